//! Rate expressions of the discrete bounds for a given joint measure.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::gauss_bounds::ActiveTerm;
use crate::scalar::{lit, Real};

use super::{DmError, DmJoint, Template, Var};

/// Margin by which strict inequalities must hold.
pub const STRICT_MARGIN: f64 = 1e-9;

/// Slack allowed on non-strict inequalities to absorb rounding.
const SLACK: f64 = 1e-12;

const S: Var = Var::State;
const SR: Var = Var::RelayStateDescription;
const SD: Var = Var::DestStateDescription;
const U: Var = Var::AuxCommon;
const U1: Var = Var::AuxDirect;
const UR: Var = Var::AuxRelay;
const UD: Var = Var::AuxDest;
const V: Var = Var::AuxOuter;
const X: Var = Var::RelayCodeword;
const XHAT: Var = Var::RelayCodewordEstimate;
const X1R: Var = Var::SourceRelayInput;
const X1D: Var = Var::SourceDestInput;
const X2: Var = Var::RelayInput;
const Y2: Var = Var::RelayOutput;
const Y3: Var = Var::DestOutput;

/// Conditional mutual information `I(A;B|C)` in bits, with `0 log 0 = 0`.
pub fn discrete_mi<T: Real>(
    joint: &DmJoint<T>,
    a: &[Var],
    b: &[Var],
    c: &[Var],
) -> Result<T, DmError> {
    check_sets(a, b, c)?;
    let cat = |x: &[Var], y: &[Var]| x.iter().chain(y).copied().collect::<Vec<_>>();
    let ac = cat(a, c);
    let bc = cat(b, c);
    let abc = cat(a, &bc);
    Ok(joint.entropy(&ac)? + joint.entropy(&bc)? - joint.entropy(&abc)? - joint.entropy(c)?)
}

/// Outcome of a rate expression with side conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DmRate<T> {
    Achieved(T),
    Infeasible { constraint: &'static str },
}

/// A rate together with every term that entered it.
#[derive(Clone, Debug, PartialEq)]
pub struct DmReport<T> {
    pub rate: DmRate<T>,
    pub active_term: ActiveTerm,
    pub terms: Vec<(&'static str, T)>,
}

impl<T: Real> DmReport<T> {
    /// The rate, or `None` when a side condition fails.
    pub fn value(&self) -> Option<T> {
        match self.rate {
            DmRate::Achieved(v) => Some(v),
            DmRate::Infeasible { .. } => None,
        }
    }

    /// Name of the violated side condition, if any.
    pub fn violated(&self) -> Option<&'static str> {
        match self.rate {
            DmRate::Achieved(_) => None,
            DmRate::Infeasible { constraint } => Some(constraint),
        }
    }

    /// Looks up a named term.
    pub fn term(&self, name: &str) -> Option<T> {
        self.terms.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }
}

fn min_report<T: Real>(
    relay: T,
    dest: T,
    violated: Option<&'static str>,
    terms: Vec<(&'static str, T)>,
) -> DmReport<T> {
    let active_term = if relay <= dest {
        ActiveTerm::RelayCut
    } else {
        ActiveTerm::MacCut
    };
    let rate = match violated {
        Some(constraint) => DmRate::Infeasible { constraint },
        None => DmRate::Achieved(relay.min(dest)),
    };
    DmReport {
        rate,
        active_term,
        terms,
    }
}

fn require<T: Real>(joint: &DmJoint<T>, expected: Template) -> Result<(), DmError> {
    if joint.template() == expected {
        Ok(())
    } else {
        Err(DmError::TemplateMismatch {
            expected,
            got: joint.template(),
        })
    }
}

/// `I(A;B|C)` over one joint, with entropies memoized by variable set.
struct Mi<'a, T> {
    joint: &'a DmJoint<T>,
    memo: RefCell<HashMap<Vec<Var>, T>>,
}

impl<'a, T: Real> Mi<'a, T> {
    fn new(joint: &'a DmJoint<T>) -> Self {
        Self {
            joint,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn h(&self, parts: &[&[Var]]) -> Result<T, DmError> {
        let mut key: Vec<Var> = parts.iter().flat_map(|p| p.iter().copied()).collect();
        key.sort();
        if let Some(h) = self.memo.borrow().get(&key) {
            return Ok(*h);
        }
        let h = self.joint.entropy(&key)?;
        self.memo.borrow_mut().insert(key, h);
        Ok(h)
    }

    fn i(&self, a: &[Var], b: &[Var], c: &[Var]) -> Result<T, DmError> {
        check_sets(a, b, c)?;
        Ok(self.h(&[a, c])? + self.h(&[b, c])? - self.h(&[a, b, c])? - self.h(&[c])?)
    }
}

fn check_sets(a: &[Var], b: &[Var], c: &[Var]) -> Result<(), DmError> {
    if a.is_empty() || b.is_empty() {
        return Err(DmError::EmptySet);
    }
    let overlaps = |x: &[Var], y: &[Var]| x.iter().any(|v| y.contains(v));
    if overlaps(a, b) || overlaps(a, c) || overlaps(b, c) {
        return Err(DmError::Overlap);
    }
    Ok(())
}

/// Lower bound with state descriptions: the smaller of the relay and
/// destination binning rates, subject to the three description constraints
/// and decodability of the outer codeword. Also reports the relay term in
/// the form used by the decoding analysis as `relay_joint_form`.
pub fn eval_lb_state_description_dm<T: Real>(joint: &DmJoint<T>) -> Result<DmReport<T>, DmError> {
    require(joint, Template::StateDescription)?;
    let m = Mi::new(joint);
    let relay = m.i(&[U], &[Y2], &[V, SR])? - m.i(&[U], &[S, SD], &[V, SR])?;
    let relay_joint_form = m.i(&[U], &[Y2, SR], &[V])? - m.i(&[U], &[S, SR, SD], &[V])?;
    let dest = m.i(&[U, V], &[Y3], &[SD])? - m.i(&[U, V], &[S, SR], &[SD])?;
    let relay_description_rate =
        m.i(&[UR], &[Y2, SR], &[U, V])? - m.i(&[UR], &[S, SR, SD], &[U, V])?;
    let common_shortfall =
        (m.i(&[U], &[Y3, SD], &[V])? - m.i(&[U], &[S, SR, SD], &[V])?).min(T::zero());
    let dest_description_rate =
        m.i(&[UD], &[Y3, SD], &[U, V])? - m.i(&[UD], &[S, SR, SD], &[U, V])? + common_shortfall;
    let cover = m.i(&[UR], &[UD], &[U, V, S, SR, SD])?;
    let relay_description = m.i(&[S], &[SR], &[])?;
    let dest_description = m.i(&[S], &[SD], &[])?;
    let joint_description = m.i(&[S], &[SR, SD], &[])? + m.i(&[SR], &[SD], &[])?;
    let outer = m.i(&[V], &[Y3, SD], &[])? - m.i(&[V], &[SR], &[])?;
    let outer_deterministic = joint.entropy(&[V])? <= lit::<T>(SLACK);

    let slack = lit::<T>(SLACK);
    let violated = if relay_description > relay_description_rate + slack {
        Some("relay_description")
    } else if dest_description > dest_description_rate + slack {
        Some("dest_description")
    } else if joint_description > relay_description_rate + dest_description_rate - cover + slack {
        Some("joint_description")
    } else if !outer_deterministic && !(outer > lit::<T>(STRICT_MARGIN)) {
        Some("outer_decodability")
    } else {
        None
    };
    let terms = vec![
        ("relay", relay),
        ("relay_joint_form", relay_joint_form),
        ("destination", dest),
        ("relay_description", relay_description),
        ("relay_description_rate", relay_description_rate),
        ("dest_description", dest_description),
        ("dest_description_rate", dest_description_rate),
        ("common_shortfall", common_shortfall),
        ("description_cover", cover),
        ("joint_description", joint_description),
        ("outer_decodability", outer),
    ];
    Ok(min_report(relay, dest, violated, terms))
}

/// Partial decode-and-forward with binning against the state.
pub fn eval_lb_partial_df_dm<T: Real>(joint: &DmJoint<T>) -> Result<DmReport<T>, DmError> {
    require(joint, Template::PartialDf)?;
    let m = Mi::new(joint);
    let binning = m.i(&[U, U1], &[S], &[X2])?;
    let relay_decode = m.i(&[U], &[Y2], &[X2])?;
    let direct_decode = m.i(&[U1], &[Y3], &[U, X2])?;
    let relay = relay_decode + direct_decode - binning;
    let dest = m.i(&[U, U1, X2], &[Y3], &[])? - binning;
    let relay_gap = relay_decode - m.i(&[U], &[S], &[X2])?;
    let direct_gap = direct_decode - m.i(&[U1], &[S], &[U, X2])?;
    let dest_gap = m.i(&[U, U1], &[Y3], &[X2])? - binning;
    let slack = -lit::<T>(SLACK);
    let violated = if relay_gap < slack {
        Some("relay_binning")
    } else if direct_gap < slack {
        Some("direct_binning")
    } else if dest_gap < slack {
        Some("dest_binning")
    } else {
        None
    };
    let terms = vec![
        ("relay", relay),
        ("destination", dest),
        ("relay_binning", relay_gap),
        ("direct_binning", direct_gap),
        ("dest_binning", dest_gap),
    ];
    Ok(min_report(relay, dest, violated, terms))
}

/// Lower bound with a description of the relay input sent ahead of time.
pub fn eval_lb_input_description_dm<T: Real>(joint: &DmJoint<T>) -> Result<DmReport<T>, DmError> {
    require(joint, Template::InputDescription)?;
    let m = Mi::new(joint);
    let rate = m.i(&[U], &[Y3], &[])? - m.i(&[U], &[S], &[])?;
    let description = m.i(&[X], &[XHAT], &[])?;
    let relay_link = m.i(&[UR], &[Y2], &[])? - m.i(&[UR], &[S], &[])? - m.i(&[UR], &[U], &[S])?;
    let feasible = relay_link - description > lit::<T>(STRICT_MARGIN);
    let outcome = if feasible {
        DmRate::Achieved(rate)
    } else {
        DmRate::Infeasible {
            constraint: "relay_codeword_description",
        }
    };
    Ok(DmReport {
        rate: outcome,
        active_term: ActiveTerm::Unconstrained,
        terms: vec![
            ("rate", rate),
            ("description", description),
            ("relay_link", relay_link),
        ],
    })
}

/// Converse for the general model.
pub fn eval_ub_dm<T: Real>(joint: &DmJoint<T>) -> Result<DmReport<T>, DmError> {
    require(joint, Template::Upper)?;
    let m = Mi::new(joint);
    let relay = m.i(&[V], &[Y2, Y3], &[U, X2])? - m.i(&[V], &[S], &[U, X2])?;
    let dest = m.i(&[V], &[Y3], &[])? - m.i(&[V], &[S], &[])?;
    Ok(min_report(
        relay,
        dest,
        None,
        vec![("relay", relay), ("destination", dest)],
    ))
}

/// Converse for the hyper-source model. Also reports the cut-set value of
/// the same joint as `cutset`.
pub fn eval_ub_hyper_dm<T: Real>(joint: &DmJoint<T>) -> Result<DmReport<T>, DmError> {
    require(joint, Template::HyperUpper)?;
    let m = Mi::new(joint);
    let relay = m.i(&[X1R], &[Y2], &[X2, S])?;
    let relay_to_dest = m.i(&[X2], &[Y3], &[])?;
    let direct = m.i(&[X1D], &[Y3], &[X2, S])?;
    let cut = cutset_terms(joint)?;
    let value = relay.min(relay_to_dest) + direct;
    Ok(DmReport {
        rate: DmRate::Achieved(value),
        active_term: if relay <= relay_to_dest {
            ActiveTerm::RelayCut
        } else {
            ActiveTerm::MacCut
        },
        terms: vec![
            ("relay", relay),
            ("relay_to_destination", relay_to_dest),
            ("direct", direct),
            ("cutset_broadcast", cut.0),
            ("cutset_mac", cut.1),
            ("cutset", cut.0.min(cut.1)),
        ],
    })
}

fn cutset_terms<T: Real>(joint: &DmJoint<T>) -> Result<(T, T), DmError> {
    let m = Mi::new(joint);
    let x1 = joint.source_vars();
    if x1.is_empty() {
        return Err(DmError::MissingVariable(Var::SourceInput));
    }
    let mut x1x2 = x1.clone();
    x1x2.push(X2);
    Ok((m.i(&x1, &[Y2, Y3], &[S, X2])?, m.i(&x1x2, &[Y3], &[S])?))
}

/// Cut-set bound of the joint's `(S, source, X2)` marginal through the
/// channel. Accepts any template that carries those variables and both
/// outputs; the source may be a single input or the split pair.
pub fn eval_cutset_dm<T: Real>(joint: &DmJoint<T>) -> Result<DmReport<T>, DmError> {
    let (broadcast, mac) = cutset_terms(joint)?;
    Ok(min_report(
        broadcast,
        mac,
        None,
        vec![("broadcast", broadcast), ("mac", mac)],
    ))
}

/// The discrete evaluators, selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DmEvaluator {
    LbStateDescription,
    LbPartialDf,
    LbInputDescription,
    Ub,
    UbHyper,
    CutSet,
}

impl DmEvaluator {
    pub const ALL: [DmEvaluator; 6] = [
        DmEvaluator::LbStateDescription,
        DmEvaluator::LbPartialDf,
        DmEvaluator::LbInputDescription,
        DmEvaluator::Ub,
        DmEvaluator::UbHyper,
        DmEvaluator::CutSet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DmEvaluator::LbStateDescription => "lb_state_description",
            DmEvaluator::LbPartialDf => "lb_partial_df",
            DmEvaluator::LbInputDescription => "lb_input_description",
            DmEvaluator::Ub => "ub",
            DmEvaluator::UbHyper => "ub_hyper",
            DmEvaluator::CutSet => "cutset",
        }
    }

    /// Measure form the evaluator is defined over.
    pub fn template(self) -> Template {
        match self {
            DmEvaluator::LbStateDescription => Template::StateDescription,
            DmEvaluator::LbPartialDf => Template::PartialDf,
            DmEvaluator::LbInputDescription => Template::InputDescription,
            DmEvaluator::Ub => Template::Upper,
            DmEvaluator::UbHyper => Template::HyperUpper,
            DmEvaluator::CutSet => Template::CutSet,
        }
    }

    pub fn evaluate<T: Real>(self, joint: &DmJoint<T>) -> Result<DmReport<T>, DmError> {
        match self {
            DmEvaluator::LbStateDescription => eval_lb_state_description_dm(joint),
            DmEvaluator::LbPartialDf => eval_lb_partial_df_dm(joint),
            DmEvaluator::LbInputDescription => eval_lb_input_description_dm(joint),
            DmEvaluator::Ub => eval_ub_dm(joint),
            DmEvaluator::UbHyper => eval_ub_hyper_dm(joint),
            DmEvaluator::CutSet => eval_cutset_dm(joint),
        }
    }
}

impl fmt::Display for DmEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DmEvaluator {
    type Err = DmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_lowercase().replace('-', "_");
        let key = key.strip_prefix("eval_").unwrap_or(&key);
        let key = key.strip_suffix("_dm").unwrap_or(key);
        DmEvaluator::ALL
            .into_iter()
            .find(|e| e.name() == key)
            .ok_or_else(|| DmError::UnknownEvaluator(s.to_string()))
    }
}
