//! Finite-alphabet evaluation of the discrete memoryless bounds for a given
//! joint measure, plus a randomized search over measures on small alphabets.
//!
//! A [`DmJoint`] is a full joint pmf over a declared list of [`Var`]s tagged
//! with the [`Template`] naming the factorization it claims. Construction
//! validates the factorization factor by factor, so every evaluator can rely
//! on it.

mod eval;
mod format;
pub mod reference;
pub mod sample;
mod search;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::{degeneracy_tol, lit, Real};

pub use eval::{
    discrete_mi, eval_cutset_dm, eval_lb_input_description_dm, eval_lb_partial_df_dm,
    eval_lb_state_description_dm, eval_ub_dm, eval_ub_hyper_dm, DmEvaluator, DmRate, DmReport,
    STRICT_MARGIN,
};
pub use format::{channel_to_text, joint_to_text, parse_channel, parse_joint};
pub use search::{search_dm, search_dm_with, DmSearchConfig, DmSearchResult, MAX_SUPPORT};

/// Errors raised by the discrete module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DmError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("unknown evaluator `{0}`")]
    UnknownEvaluator(String),
    #[error("variable {0} is not part of the joint")]
    MissingVariable(Var),
    #[error("variable {0} is declared twice")]
    DuplicateVariable(Var),
    #[error("variable sets overlap")]
    Overlap,
    #[error("empty variable set")]
    EmptySet,
    #[error("alphabet of {0} must have at least one symbol")]
    EmptyAlphabet(Var),
    #[error("size mismatch for {what}: expected {expected}, got {got}")]
    SizeMismatch {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("negative or non-finite probability {value} in {what}")]
    InvalidProbability { what: String, value: f64 },
    #[error("{what} sums to {sum}, not 1")]
    NotNormalized { what: String, sum: f64 },
    #[error("template {template} expects variables {expected:?}")]
    TemplateVariables {
        template: Template,
        expected: Vec<Var>,
    },
    #[error("factor {factor} violated by {deviation:e}")]
    Factorization { factor: String, deviation: f64 },
    #[error("joint disagrees with the channel by {0:e}")]
    ChannelMismatch(f64),
    #[error("evaluator needs a {expected} joint, got {got}")]
    TemplateMismatch { expected: Template, got: Template },
    #[error("joint support {0} exceeds the limit")]
    SupportTooLarge(usize),
    #[error("invalid permutation for {0}")]
    InvalidPermutation(Var),
    #[error("no restart produced a feasible joint")]
    NoFeasibleJoint,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Random variables that can appear in a discrete joint measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Channel state.
    State,
    /// State description intended for the relay.
    RelayStateDescription,
    /// State description intended for the destination.
    DestStateDescription,
    /// Auxiliary carrying the cooperatively decoded message part.
    AuxCommon,
    /// Auxiliary carrying the directly decoded message part.
    AuxDirect,
    /// Auxiliary carrying the relay's description.
    AuxRelay,
    /// Auxiliary carrying the destination's description.
    AuxDest,
    /// Outer auxiliary resolved at the relay.
    AuxOuter,
    /// Relay input computed at the source.
    RelayCodeword,
    /// Relay's estimate of that codeword.
    RelayCodewordEstimate,
    /// Source input.
    SourceInput,
    /// Source input component heard at the relay.
    SourceRelayInput,
    /// Source input component heard at the destination.
    SourceDestInput,
    /// Relay input.
    RelayInput,
    /// Relay output.
    RelayOutput,
    /// Destination output.
    DestOutput,
}

impl Var {
    pub const ALL: [Var; 16] = [
        Var::State,
        Var::RelayStateDescription,
        Var::DestStateDescription,
        Var::AuxCommon,
        Var::AuxDirect,
        Var::AuxRelay,
        Var::AuxDest,
        Var::AuxOuter,
        Var::RelayCodeword,
        Var::RelayCodewordEstimate,
        Var::SourceInput,
        Var::SourceRelayInput,
        Var::SourceDestInput,
        Var::RelayInput,
        Var::RelayOutput,
        Var::DestOutput,
    ];

    /// Short token used in files and on the command line.
    pub fn token(self) -> &'static str {
        match self {
            Var::State => "S",
            Var::RelayStateDescription => "SR",
            Var::DestStateDescription => "SD",
            Var::AuxCommon => "U",
            Var::AuxDirect => "U1",
            Var::AuxRelay => "UR",
            Var::AuxDest => "UD",
            Var::AuxOuter => "V",
            Var::RelayCodeword => "X",
            Var::RelayCodewordEstimate => "XHAT",
            Var::SourceInput => "X1",
            Var::SourceRelayInput => "X1R",
            Var::SourceDestInput => "X1D",
            Var::RelayInput => "X2",
            Var::RelayOutput => "Y2",
            Var::DestOutput => "Y3",
        }
    }

    /// Whether the variable is an auxiliary whose alphabet the user chooses.
    pub fn is_auxiliary(self) -> bool {
        matches!(
            self,
            Var::RelayStateDescription
                | Var::DestStateDescription
                | Var::AuxCommon
                | Var::AuxDirect
                | Var::AuxRelay
                | Var::AuxDest
                | Var::AuxOuter
                | Var::RelayCodeword
        )
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Var {
    type Err = DmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| *c != '_')
            .collect::<String>()
            .to_uppercase();
        Var::ALL
            .into_iter()
            .find(|v| v.token() == key)
            .ok_or_else(|| DmError::UnknownVariable(s.to_string()))
    }
}

/// Shape of the source input alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceAlphabet {
    /// A single input.
    Single(usize),
    /// Two components, one heard at the relay and one at the destination.
    /// The flat input index is `relay * dest_size + dest`.
    Split { relay: usize, dest: usize },
}

impl SourceAlphabet {
    /// Number of flat source symbols.
    pub fn size(self) -> usize {
        match self {
            SourceAlphabet::Single(n) => n,
            SourceAlphabet::Split { relay, dest } => relay * dest,
        }
    }

    /// Source variables and their alphabet sizes.
    pub fn variables(self) -> Vec<(Var, usize)> {
        match self {
            SourceAlphabet::Single(n) => vec![(Var::SourceInput, n)],
            SourceAlphabet::Split { relay, dest } => {
                vec![(Var::SourceRelayInput, relay), (Var::SourceDestInput, dest)]
            }
        }
    }
}

/// Alphabet sizes of a discrete channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelSizes {
    pub state: usize,
    pub source: SourceAlphabet,
    pub relay_input: usize,
    pub relay_output: usize,
    pub dest_output: usize,
}

impl ChannelSizes {
    fn kernel_len(&self) -> usize {
        self.state * self.source.size() * self.relay_input * self.relay_output * self.dest_output
    }

    /// Size of every channel variable, including split source components.
    pub fn of(&self, var: Var) -> Option<usize> {
        match var {
            Var::State => Some(self.state),
            Var::RelayInput => Some(self.relay_input),
            Var::RelayOutput => Some(self.relay_output),
            Var::DestOutput => Some(self.dest_output),
            _ => self
                .source
                .variables()
                .into_iter()
                .find(|(v, _)| *v == var)
                .map(|(_, n)| n),
        }
    }
}

/// A discrete memoryless state-dependent relay channel: state pmf and
/// transition kernel `W(y2, y3 | x1, x2, s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DmChannel<T> {
    sizes: ChannelSizes,
    state_pmf: Vec<T>,
    kernel: Vec<T>,
}

fn check_probability<T: Real>(what: &str, p: T) -> Result<(), DmError> {
    if p.is_finite() && p >= T::zero() {
        Ok(())
    } else {
        Err(DmError::InvalidProbability {
            what: what.to_string(),
            value: p.to_f64_lossy(),
        })
    }
}

fn check_normalized<T: Real>(what: &str, row: &[T]) -> Result<(), DmError> {
    let sum = row.iter().fold(T::zero(), |a, &b| a + b);
    if (sum - T::one()).abs() <= degeneracy_tol::<T>() {
        Ok(())
    } else {
        Err(DmError::NotNormalized {
            what: what.to_string(),
            sum: sum.to_f64_lossy(),
        })
    }
}

impl<T: Real> DmChannel<T> {
    /// Builds a channel from a state pmf and a kernel stored in the order
    /// `(s, x1, x2, y2, y3)`, row-major.
    pub fn new(sizes: ChannelSizes, state_pmf: Vec<T>, kernel: Vec<T>) -> Result<Self, DmError> {
        let named = [
            (Var::State, sizes.state),
            (Var::RelayInput, sizes.relay_input),
            (Var::RelayOutput, sizes.relay_output),
            (Var::DestOutput, sizes.dest_output),
        ];
        for (var, n) in named.into_iter().chain(sizes.source.variables()) {
            if n == 0 {
                return Err(DmError::EmptyAlphabet(var));
            }
        }
        if state_pmf.len() != sizes.state {
            return Err(DmError::SizeMismatch {
                what: "state pmf".into(),
                expected: sizes.state,
                got: state_pmf.len(),
            });
        }
        if kernel.len() != sizes.kernel_len() {
            return Err(DmError::SizeMismatch {
                what: "kernel".into(),
                expected: sizes.kernel_len(),
                got: kernel.len(),
            });
        }
        for &p in state_pmf.iter() {
            check_probability("state pmf", p)?;
        }
        for &p in kernel.iter() {
            check_probability("kernel", p)?;
        }
        check_normalized("state pmf", &state_pmf)?;
        let row = sizes.relay_output * sizes.dest_output;
        for (r, chunk) in kernel.chunks(row).enumerate() {
            check_normalized(&format!("kernel row {r}"), chunk)?;
        }
        Ok(Self {
            sizes,
            state_pmf,
            kernel,
        })
    }

    /// Builds a channel from a kernel function `w(s, x1, x2, y2, y3)`, where
    /// `x1` is the flat source index.
    pub fn from_fn(
        sizes: ChannelSizes,
        state_pmf: Vec<T>,
        w: impl Fn(usize, usize, usize, usize, usize) -> T,
    ) -> Result<Self, DmError> {
        let mut kernel = Vec::with_capacity(sizes.kernel_len());
        for s in 0..sizes.state {
            for x1 in 0..sizes.source.size() {
                for x2 in 0..sizes.relay_input {
                    for y2 in 0..sizes.relay_output {
                        for y3 in 0..sizes.dest_output {
                            kernel.push(w(s, x1, x2, y2, y3));
                        }
                    }
                }
            }
        }
        Self::new(sizes, state_pmf, kernel)
    }

    /// Builds a channel whose relay link `w2(s, x1r, y2)` and destination link
    /// `w3(s, x1d, x2, y3)` are separate, as in the hyper-source model.
    pub fn from_hyper_links(
        sizes: ChannelSizes,
        state_pmf: Vec<T>,
        w2: impl Fn(usize, usize, usize) -> T,
        w3: impl Fn(usize, usize, usize, usize) -> T,
    ) -> Result<Self, DmError> {
        let dest = match sizes.source {
            SourceAlphabet::Split { dest, .. } => dest,
            SourceAlphabet::Single(_) => {
                return Err(DmError::MissingVariable(Var::SourceRelayInput));
            }
        };
        Self::from_fn(sizes, state_pmf, |s, x1, x2, y2, y3| {
            w2(s, x1 / dest, y2) * w3(s, x1 % dest, x2, y3)
        })
    }

    pub fn sizes(&self) -> ChannelSizes {
        self.sizes
    }

    pub fn state_pmf(&self) -> &[T] {
        &self.state_pmf
    }

    /// Transition probability with `x1` the flat source index.
    pub fn kernel(&self, s: usize, x1: usize, x2: usize, y2: usize, y3: usize) -> T {
        let z = &self.sizes;
        let i = (((s * z.source.size() + x1) * z.relay_input + x2) * z.relay_output + y2)
            * z.dest_output
            + y3;
        self.kernel[i]
    }

    /// Raw kernel in `(s, x1, x2, y2, y3)` order.
    pub fn kernel_table(&self) -> &[T] {
        &self.kernel
    }
}

/// Measure forms claimed by a joint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Template {
    /// Two state descriptions plus cooperative binning.
    StateDescription,
    /// Partial decode-and-forward with binning and no state description.
    PartialDf,
    /// Description of the relay input sent ahead of time.
    InputDescription,
    /// Converse for the general model.
    Upper,
    /// Converse for the hyper-source model.
    HyperUpper,
    /// Inputs only, for the cut-set bound.
    CutSet,
}

impl Template {
    pub const ALL: [Template; 6] = [
        Template::StateDescription,
        Template::PartialDf,
        Template::InputDescription,
        Template::Upper,
        Template::HyperUpper,
        Template::CutSet,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Template::StateDescription => "state_description",
            Template::PartialDf => "partial_df",
            Template::InputDescription => "input_description",
            Template::Upper => "upper",
            Template::HyperUpper => "hyper_upper",
            Template::CutSet => "cutset",
        }
    }

    /// Factor list in construction order. `source` lists the source input
    /// variables of the joint.
    pub(crate) fn factors(self, source: &[Var]) -> Vec<Factor> {
        use Var::*;
        let x1 = source.to_vec();
        let with_x1 = |mut extra: Vec<Var>| {
            extra.splice(0..0, x1.iter().copied());
            extra
        };
        let channel = Factor::channel(
            vec![RelayOutput, DestOutput],
            with_x1(vec![RelayInput, State]),
        );
        match self {
            Template::StateDescription => vec![
                Factor::state(),
                Factor::free(
                    vec![RelayStateDescription, DestStateDescription],
                    vec![State],
                ),
                Factor::free(vec![AuxOuter], vec![RelayStateDescription]),
                Factor::free(
                    vec![AuxCommon],
                    vec![AuxOuter, State, RelayStateDescription, DestStateDescription],
                ),
                Factor::free(
                    vec![AuxRelay, AuxDest],
                    vec![
                        AuxOuter,
                        AuxCommon,
                        State,
                        RelayStateDescription,
                        DestStateDescription,
                    ],
                ),
                Factor::free(
                    x1.clone(),
                    vec![
                        AuxRelay,
                        AuxDest,
                        AuxCommon,
                        AuxOuter,
                        State,
                        RelayStateDescription,
                        DestStateDescription,
                    ],
                ),
                Factor::free(vec![RelayInput], vec![AuxOuter, RelayStateDescription]),
                channel,
            ],
            Template::PartialDf => vec![
                Factor::state(),
                Factor::free(vec![RelayInput], vec![]),
                Factor::free(vec![AuxCommon], vec![State, RelayInput]),
                Factor::free(with_x1(vec![AuxDirect]), vec![AuxCommon, State, RelayInput]),
                channel,
            ],
            Template::InputDescription => vec![
                Factor::state(),
                Factor::free(vec![AuxCommon, AuxRelay], vec![State]),
                Factor::free(x1.clone(), vec![AuxCommon, AuxRelay, State]),
                Factor::free(vec![RelayCodeword], vec![AuxCommon, State]),
                Factor::free(vec![RelayCodewordEstimate], vec![RelayCodeword]),
                Factor::copy(RelayInput, RelayCodewordEstimate),
                channel,
            ],
            Template::Upper => vec![
                Factor::state(),
                Factor::free(vec![AuxCommon], vec![State]),
                Factor::free(vec![RelayInput], vec![AuxCommon, State]),
                Factor::free(with_x1(vec![AuxOuter]), vec![AuxCommon, State]),
                channel,
            ],
            Template::HyperUpper => vec![
                Factor::state(),
                Factor::free(vec![RelayInput], vec![]),
                Factor::free(vec![SourceRelayInput], vec![RelayInput]),
                Factor::free(vec![SourceDestInput], vec![RelayInput, State]),
                Factor::channel(vec![RelayOutput], vec![SourceRelayInput, State]),
                Factor::channel(vec![DestOutput], vec![SourceDestInput, RelayInput, State]),
            ],
            Template::CutSet => vec![
                Factor::state(),
                Factor::free(with_x1(vec![RelayInput]), vec![State]),
                channel,
            ],
        }
    }

    /// Variables of the template in construction order.
    pub fn variables(self, source: SourceAlphabet) -> Vec<Var> {
        let src: Vec<Var> = self.source_vars(source);
        self.factors(&src)
            .into_iter()
            .flat_map(|f| f.children)
            .collect()
    }

    fn source_vars(self, source: SourceAlphabet) -> Vec<Var> {
        if self == Template::HyperUpper {
            vec![Var::SourceRelayInput, Var::SourceDestInput]
        } else {
            source.variables().into_iter().map(|(v, _)| v).collect()
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Template {
    type Err = DmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_lowercase().replace('-', "_");
        Template::ALL
            .into_iter()
            .find(|t| t.token() == key)
            .ok_or_else(|| DmError::UnknownTemplate(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum FactorKind {
    /// The state pmf.
    State,
    /// A conditional chosen by the designer of the scheme.
    Free,
    /// Deterministic copy of the single parent.
    Copy,
    /// A conditional fixed by the channel kernel.
    Channel,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Factor {
    pub(crate) children: Vec<Var>,
    pub(crate) parents: Vec<Var>,
    pub(crate) kind: FactorKind,
}

impl Factor {
    fn state() -> Self {
        Self {
            children: vec![Var::State],
            parents: vec![],
            kind: FactorKind::State,
        }
    }

    fn free(children: Vec<Var>, parents: Vec<Var>) -> Self {
        Self {
            children,
            parents,
            kind: FactorKind::Free,
        }
    }

    fn copy(child: Var, parent: Var) -> Self {
        Self {
            children: vec![child],
            parents: vec![parent],
            kind: FactorKind::Copy,
        }
    }

    fn channel(children: Vec<Var>, parents: Vec<Var>) -> Self {
        Self {
            children,
            parents,
            kind: FactorKind::Channel,
        }
    }

    pub(crate) fn label(&self) -> String {
        let join = |v: &[Var]| v.iter().map(|x| x.token()).collect::<Vec<_>>().join(",");
        if self.parents.is_empty() {
            format!("P({})", join(&self.children))
        } else {
            format!("P({}|{})", join(&self.children), join(&self.parents))
        }
    }
}

/// Tolerance for factorization and channel consistency checks.
pub(crate) fn factor_tol<T: Real>() -> T {
    lit::<T>(1e-9).max(T::epsilon() * lit::<T>(1e3))
}

/// Mixed-radix strides of `sub` inside a table over `vars` with `sizes`.
/// Variables of `vars` that are not in `sub` get stride 0.
fn strides_into(vars: &[Var], sizes: &[usize], sub: &[Var]) -> Vec<usize> {
    let mut out = vec![0; vars.len()];
    let mut stride = 1;
    for v in sub.iter().rev() {
        let i = vars
            .iter()
            .position(|x| x == v)
            .expect("sub-variable present");
        out[i] = stride;
        stride *= sizes[i];
    }
    out
}

/// Visits every configuration of a table with the given sizes, passing the
/// digit vector.
fn for_each_config(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    let total: usize = sizes.iter().product();
    let mut digits = vec![0usize; sizes.len()];
    for _ in 0..total {
        f(&digits);
        for d in (0..sizes.len()).rev() {
            digits[d] += 1;
            if digits[d] < sizes[d] {
                break;
            }
            digits[d] = 0;
        }
    }
}

fn dot(digits: &[usize], strides: &[usize]) -> usize {
    digits.iter().zip(strides).map(|(d, s)| d * s).sum()
}

/// A joint pmf over named discrete variables, tagged with the measure form it
/// satisfies. The pmf is stored row-major with the first variable slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct DmJoint<T> {
    vars: Vec<Var>,
    sizes: Vec<usize>,
    pmf: Vec<T>,
    template: Template,
}

impl<T: Real> DmJoint<T> {
    /// Builds a joint and validates normalization and every factor of the
    /// claimed template.
    pub fn new(
        vars: Vec<Var>,
        sizes: Vec<usize>,
        pmf: Vec<T>,
        template: Template,
    ) -> Result<Self, DmError> {
        let joint = Self::unchecked(vars, sizes, pmf, template)?;
        joint.check_template()?;
        Ok(joint)
    }

    /// Builds a joint checking only shapes and normalization.
    pub(crate) fn unchecked(
        vars: Vec<Var>,
        sizes: Vec<usize>,
        pmf: Vec<T>,
        template: Template,
    ) -> Result<Self, DmError> {
        if vars.len() != sizes.len() {
            return Err(DmError::SizeMismatch {
                what: "variable sizes".into(),
                expected: vars.len(),
                got: sizes.len(),
            });
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(DmError::DuplicateVariable(*v));
            }
            if sizes[i] == 0 {
                return Err(DmError::EmptyAlphabet(*v));
            }
        }
        let total: usize = sizes.iter().product();
        if pmf.len() != total {
            return Err(DmError::SizeMismatch {
                what: "pmf".into(),
                expected: total,
                got: pmf.len(),
            });
        }
        for &p in pmf.iter() {
            check_probability("joint pmf", p)?;
        }
        check_normalized("joint pmf", &pmf)?;
        Ok(Self {
            vars,
            sizes,
            pmf,
            template,
        })
    }

    pub fn variables(&self) -> &[Var] {
        &self.vars
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probabilities(&self) -> &[T] {
        &self.pmf
    }

    pub fn template(&self) -> Template {
        self.template
    }

    pub fn contains(&self, var: Var) -> bool {
        self.vars.contains(&var)
    }

    /// Alphabet size of a variable.
    pub fn size_of(&self, var: Var) -> Result<usize, DmError> {
        self.position(var).map(|i| self.sizes[i])
    }

    fn position(&self, var: Var) -> Result<usize, DmError> {
        self.vars
            .iter()
            .position(|v| *v == var)
            .ok_or(DmError::MissingVariable(var))
    }

    /// Source input variables carried by the joint.
    pub fn source_vars(&self) -> Vec<Var> {
        if self.contains(Var::SourceInput) {
            vec![Var::SourceInput]
        } else {
            [Var::SourceRelayInput, Var::SourceDestInput]
                .into_iter()
                .filter(|v| self.contains(*v))
                .collect()
        }
    }

    /// Marginal pmf over `keep`, in the order given.
    pub fn marginal(&self, keep: &[Var]) -> Result<Vec<T>, DmError> {
        let mut sizes = Vec::with_capacity(keep.len());
        for (i, v) in keep.iter().enumerate() {
            if keep[..i].contains(v) {
                return Err(DmError::DuplicateVariable(*v));
            }
            sizes.push(self.size_of(*v)?);
        }
        let strides = strides_into(&self.vars, &self.sizes, keep);
        let mut out = vec![T::zero(); sizes.iter().product()];
        // Odometer over the joint digits with the target index kept in step.
        let n = self.sizes.len();
        let mut digits = vec![0usize; n];
        let mut t = 0usize;
        for &p in self.pmf.iter() {
            out[t] = out[t] + p;
            for d in (0..n).rev() {
                digits[d] += 1;
                t += strides[d];
                if digits[d] < self.sizes[d] {
                    break;
                }
                t -= strides[d] * self.sizes[d];
                digits[d] = 0;
            }
        }
        Ok(out)
    }

    /// Entropy in bits of the marginal over `set`.
    pub fn entropy(&self, set: &[Var]) -> Result<T, DmError> {
        Ok(self
            .marginal(set)?
            .into_iter()
            .filter(|p| *p > T::zero())
            .fold(T::zero(), |h, p| h - p * p.log2()))
    }

    /// Checks every factor of the template against the joint's own
    /// conditionals, plus the variable list.
    pub fn check_template(&self) -> Result<(), DmError> {
        let source = self.source_vars();
        let factors = self.template.factors(&source);
        let expected: Vec<Var> = factors.iter().flat_map(|f| f.children.clone()).collect();
        let same = expected.len() == self.vars.len() && expected.iter().all(|v| self.contains(*v));
        if !same || source.is_empty() {
            return Err(DmError::TemplateVariables {
                template: self.template,
                expected,
            });
        }
        let mut prev: Vec<Var> = Vec::new();
        for f in factors.iter() {
            let dev = self.factor_deviation(f, &prev)?;
            if !(dev <= factor_tol::<T>()) {
                return Err(DmError::Factorization {
                    factor: f.label(),
                    deviation: dev.to_f64_lossy(),
                });
            }
            prev.extend(f.children.iter().copied());
        }
        Ok(())
    }

    /// Largest deviation of the factor from the joint, weighted by the
    /// probability of the conditioning configuration.
    fn factor_deviation(&self, f: &Factor, prev: &[Var]) -> Result<T, DmError> {
        if f.kind == FactorKind::Copy {
            let (c, p) = (f.children[0], f.parents[0]);
            let (nc, np) = (self.size_of(c)?, self.size_of(p)?);
            if nc != np {
                return Err(DmError::SizeMismatch {
                    what: format!("copy {c} of {p}"),
                    expected: np,
                    got: nc,
                });
            }
            let m = self.marginal(&[c, p])?;
            let off = (0..nc * np)
                .filter(|i| i / np != i % np)
                .fold(T::zero(), |a, i| a + m[i]);
            return Ok(off);
        }
        // Compare P(children, prev) with P(children | parents) P(prev).
        let mut all: Vec<Var> = f.children.clone();
        all.extend(prev.iter().copied());
        if all.len() == f.children.len() + f.parents.len() {
            return Ok(T::zero());
        }
        let sizes: Vec<usize> = all
            .iter()
            .map(|v| self.size_of(*v))
            .collect::<Result<_, _>>()?;
        let mut cp: Vec<Var> = f.children.clone();
        cp.extend(f.parents.iter().copied());
        let p_all = self.marginal(&all)?;
        let p_prev = self.marginal(prev)?;
        let p_cp = self.marginal(&cp)?;
        let p_par = self.marginal(&f.parents)?;
        let s_prev = strides_into(&all, &sizes, prev);
        let s_cp = strides_into(&all, &sizes, &cp);
        let s_par = strides_into(&all, &sizes, &f.parents);
        let mut worst = T::zero();
        let mut k = 0;
        for_each_config(&sizes, |d| {
            let pa = p_par[dot(d, &s_par)];
            if pa > T::zero() {
                let model = p_cp[dot(d, &s_cp)] / pa * p_prev[dot(d, &s_prev)];
                worst = worst.max((p_all[k] - model).abs());
            }
            k += 1;
        });
        Ok(worst)
    }

    /// Checks that the joint's state marginal and output conditionals agree
    /// with `channel`.
    pub fn check_channel(&self, channel: &DmChannel<T>) -> Result<(), DmError> {
        let z = channel.sizes();
        let source = self.source_vars();
        let mut inputs: Vec<Var> = vec![Var::State];
        inputs.extend(source.iter().copied());
        inputs.push(Var::RelayInput);
        for v in inputs
            .iter()
            .chain([Var::RelayOutput, Var::DestOutput].iter())
        {
            let want = match *v {
                Var::SourceInput => Some(z.source.size()),
                other => z.of(other),
            };
            let got = self.size_of(*v)?;
            match want {
                Some(n) if n == got => {}
                Some(n) => {
                    return Err(DmError::SizeMismatch {
                        what: v.to_string(),
                        expected: n,
                        got,
                    })
                }
                None => return Err(DmError::MissingVariable(*v)),
            }
        }
        let tol = factor_tol::<T>();
        let ps = self.marginal(&[Var::State])?;
        let state_dev = ps
            .iter()
            .zip(channel.state_pmf())
            .fold(T::zero(), |w, (a, b)| w.max((*a - *b).abs()));
        if !(state_dev <= tol) {
            return Err(DmError::ChannelMismatch(state_dev.to_f64_lossy()));
        }
        let p_in = self.marginal(&inputs)?;
        let mut full = inputs.clone();
        full.extend([Var::RelayOutput, Var::DestOutput]);
        let p_full = self.marginal(&full)?;
        let (ny2, ny3) = (z.relay_output, z.dest_output);
        let n_x1 = z.source.size();
        let mut worst = T::zero();
        for (i, &p) in p_in.iter().enumerate() {
            // inputs are (s, x1..., x2) in row-major order, so the flat
            // source index is contiguous.
            let x2 = i % z.relay_input;
            let x1 = (i / z.relay_input) % n_x1;
            let s = i / (z.relay_input * n_x1);
            for y2 in 0..ny2 {
                for y3 in 0..ny3 {
                    let model = p * channel.kernel(s, x1, x2, y2, y3);
                    worst = worst.max((p_full[(i * ny2 + y2) * ny3 + y3] - model).abs());
                }
            }
        }
        if worst <= tol {
            Ok(())
        } else {
            Err(DmError::ChannelMismatch(worst.to_f64_lossy()))
        }
    }

    /// Returns the joint with the symbols of `var` renamed: symbol `a`
    /// becomes `perm[a]`.
    pub fn relabel(&self, var: Var, perm: &[usize]) -> Result<Self, DmError> {
        let i = self.position(var)?;
        let n = self.sizes[i];
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&a| a >= n || std::mem::replace(&mut seen[a], true))
        {
            return Err(DmError::InvalidPermutation(var));
        }
        let stride: usize = self.sizes[i + 1..].iter().product();
        let mut pmf = vec![T::zero(); self.pmf.len()];
        for (k, &p) in self.pmf.iter().enumerate() {
            let a = (k / stride) % n;
            let target = k - a * stride + perm[a] * stride;
            pmf[target] = p;
        }
        Ok(Self {
            pmf,
            ..self.clone()
        })
    }

    /// The cut-set joint induced by this joint: its `(S, source, X2)`
    /// marginal times the channel kernel.
    pub fn induced_cutset(&self, channel: &DmChannel<T>) -> Result<Self, DmError> {
        let source = self.source_vars();
        let z = channel.sizes();
        let mut inputs: Vec<Var> = vec![Var::State];
        inputs.extend(source.iter().copied());
        inputs.push(Var::RelayInput);
        let p_in = self.marginal(&inputs)?;
        let n_x1 = z.source.size();
        let (ny2, ny3) = (z.relay_output, z.dest_output);
        let mut pmf = Vec::with_capacity(p_in.len() * ny2 * ny3);
        for (i, &p) in p_in.iter().enumerate() {
            let x2 = i % z.relay_input;
            let x1 = (i / z.relay_input) % n_x1;
            let s = i / (z.relay_input * n_x1);
            for y2 in 0..ny2 {
                for y3 in 0..ny3 {
                    pmf.push(p * channel.kernel(s, x1, x2, y2, y3));
                }
            }
        }
        let mut vars = inputs;
        vars.extend([Var::RelayOutput, Var::DestOutput]);
        let sizes = vars
            .iter()
            .map(|v| self.size_of(*v))
            .collect::<Result<_, _>>()?;
        Self::new(vars, sizes, pmf, Template::CutSet)
    }
}

/// Chosen alphabet sizes for auxiliary variables. Missing entries default to
/// binary; the relay-codeword estimate always matches the relay input.
pub type AuxSizes = BTreeMap<Var, usize>;

/// Conditional tables of a template for a given channel, ready to be filled
/// in and multiplied into a joint.
#[derive(Clone, Debug)]
pub struct JointLayout<T> {
    template: Template,
    vars: Vec<Var>,
    sizes: Vec<usize>,
    tables: Vec<LayoutFactor<T>>,
}

#[derive(Clone, Debug)]
struct LayoutFactor<T> {
    label: String,
    free: bool,
    rows: usize,
    cols: usize,
    row_strides: Vec<usize>,
    col_strides: Vec<usize>,
    fixed: Vec<T>,
}

impl<T: Real> JointLayout<T> {
    /// Resolves the template against `channel` and the auxiliary sizes.
    pub fn new(
        channel: &DmChannel<T>,
        template: Template,
        aux: &AuxSizes,
    ) -> Result<Self, DmError> {
        let z = channel.sizes();
        let source = template.source_vars(z.source);
        if template == Template::HyperUpper && matches!(z.source, SourceAlphabet::Single(_)) {
            return Err(DmError::MissingVariable(Var::SourceRelayInput));
        }
        let factors = template.factors(&source);
        let vars: Vec<Var> = factors.iter().flat_map(|f| f.children.clone()).collect();
        let size_of = |v: Var| -> Result<usize, DmError> {
            let n = match v {
                Var::SourceInput => z.source.size(),
                Var::RelayCodewordEstimate => z.relay_input,
                Var::RelayCodeword => aux.get(&v).copied().unwrap_or(z.relay_input),
                other => match z.of(other) {
                    Some(n) => n,
                    None => aux.get(&other).copied().unwrap_or(2),
                },
            };
            if n == 0 {
                Err(DmError::EmptyAlphabet(v))
            } else {
                Ok(n)
            }
        };
        let sizes: Vec<usize> = vars.iter().map(|v| size_of(*v)).collect::<Result<_, _>>()?;
        let support = sizes.iter().try_fold(1usize, |a, &n| a.checked_mul(n));
        match support {
            Some(n) if n <= MAX_SUPPORT => {}
            Some(n) => return Err(DmError::SupportTooLarge(n)),
            None => return Err(DmError::SupportTooLarge(usize::MAX)),
        }
        let tables = factors
            .iter()
            .map(|f| {
                let sz = |set: &[Var]| {
                    set.iter()
                        .map(|v| sizes[vars.iter().position(|x| x == v).unwrap()])
                        .collect::<Vec<_>>()
                };
                let (psz, csz) = (sz(&f.parents), sz(&f.children));
                let rows: usize = psz.iter().product();
                let cols: usize = csz.iter().product();
                let fixed = match f.kind {
                    FactorKind::Free => Vec::new(),
                    FactorKind::State => channel.state_pmf().to_vec(),
                    FactorKind::Copy => (0..rows * cols)
                        .map(|i| {
                            if i / cols == i % cols {
                                T::one()
                            } else {
                                T::zero()
                            }
                        })
                        .collect(),
                    FactorKind::Channel => channel_table(channel, f, &psz, &csz),
                };
                LayoutFactor {
                    label: f.label(),
                    free: f.kind == FactorKind::Free,
                    rows,
                    cols,
                    row_strides: strides_into(&vars, &sizes, &f.parents),
                    col_strides: strides_into(&vars, &sizes, &f.children),
                    fixed,
                }
            })
            .collect();
        let layout = Self {
            template,
            vars,
            sizes,
            tables,
        };
        if template == Template::HyperUpper {
            // The split channel must factor into separate links.
            let uniform = layout.uniform_free();
            layout.assemble_trusted(&uniform)?.check_channel(channel)?;
        }
        Ok(layout)
    }

    pub fn template(&self) -> Template {
        self.template
    }

    pub fn variables(&self) -> &[Var] {
        &self.vars
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of joint entries.
    pub fn support(&self) -> usize {
        self.sizes.iter().product()
    }

    /// `(label, rows, cols)` of every free conditional, in order.
    pub fn free_shapes(&self) -> Vec<(String, usize, usize)> {
        self.tables
            .iter()
            .filter(|t| t.free)
            .map(|t| (t.label.clone(), t.rows, t.cols))
            .collect()
    }

    fn uniform_free(&self) -> Vec<Vec<T>> {
        self.free_shapes()
            .into_iter()
            .map(|(_, r, c)| vec![T::one() / lit::<T>(c as f64); r * c])
            .collect()
    }

    /// Multiplies the free conditionals (row-major, one row per parent
    /// configuration) with the fixed factors and validates the result.
    pub fn assemble(&self, free: &[Vec<T>]) -> Result<DmJoint<T>, DmError> {
        for (t, (label, r, c)) in free.iter().zip(self.free_shapes()) {
            if t.len() != r * c {
                return Err(DmError::SizeMismatch {
                    what: label,
                    expected: r * c,
                    got: t.len(),
                });
            }
            for (row, chunk) in t.chunks(c).enumerate() {
                for &p in chunk {
                    check_probability(&label, p)?;
                }
                check_normalized(&format!("{label} row {row}"), chunk)?;
            }
        }
        let joint = self.assemble_trusted(free)?;
        joint.check_template()?;
        Ok(joint)
    }

    pub(crate) fn assemble_trusted(&self, free: &[Vec<T>]) -> Result<DmJoint<T>, DmError> {
        let n_free = self.tables.iter().filter(|t| t.free).count();
        if free.len() != n_free {
            return Err(DmError::SizeMismatch {
                what: "free conditionals".into(),
                expected: n_free,
                got: free.len(),
            });
        }
        let mut free_iter = free.iter();
        let tables: Vec<(&LayoutFactor<T>, &[T])> = self
            .tables
            .iter()
            .map(|t| {
                let data: &[T] = if t.free {
                    free_iter.next().unwrap()
                } else {
                    &t.fixed
                };
                (t, data)
            })
            .collect();
        // Per-factor flat offsets `row * cols + col`, advanced with the
        // odometer over the joint digits.
        let n = self.sizes.len();
        let steps: Vec<Vec<usize>> = tables
            .iter()
            .map(|(t, _)| {
                (0..n)
                    .map(|d| t.row_strides[d] * t.cols + t.col_strides[d])
                    .collect()
            })
            .collect();
        let mut offsets = vec![0usize; tables.len()];
        let mut digits = vec![0usize; n];
        let mut pmf = Vec::with_capacity(self.support());
        for _ in 0..self.support() {
            let p = tables
                .iter()
                .zip(&offsets)
                .fold(
                    T::one(),
                    |acc, ((_, data), &o)| if acc == T::zero() { acc } else { acc * data[o] },
                );
            pmf.push(p);
            for d in (0..n).rev() {
                digits[d] += 1;
                offsets
                    .iter_mut()
                    .zip(&steps)
                    .for_each(|(o, st)| *o += st[d]);
                if digits[d] < self.sizes[d] {
                    break;
                }
                offsets
                    .iter_mut()
                    .zip(&steps)
                    .for_each(|(o, st)| *o -= st[d] * self.sizes[d]);
                digits[d] = 0;
            }
        }
        // Renormalize away rounding drift in long products.
        let sum = pmf.iter().fold(T::zero(), |a, &b| a + b);
        if sum > T::zero() {
            pmf.iter_mut().for_each(|p| *p = *p / sum);
        }
        DmJoint::unchecked(self.vars.clone(), self.sizes.clone(), pmf, self.template)
    }
}

/// Conditional table `P(children | parents)` read off the channel kernel,
/// marginalizing outputs not among the children and fixing inputs not among
/// the parents at symbol 0.
fn channel_table<T: Real>(
    channel: &DmChannel<T>,
    f: &Factor,
    psz: &[usize],
    csz: &[usize],
) -> Vec<T> {
    let z = channel.sizes();
    let dest = match z.source {
        SourceAlphabet::Split { dest, .. } => dest,
        SourceAlphabet::Single(_) => 1,
    };
    let rows: usize = psz.iter().product();
    let cols: usize = csz.iter().product();
    let mut out = vec![T::zero(); rows * cols];
    let mut row = 0;
    for_each_config(psz, |pd| {
        let get = |v: Var| {
            f.parents
                .iter()
                .position(|x| *x == v)
                .map(|i| pd[i])
                .unwrap_or(0)
        };
        let s = get(Var::State);
        let x2 = get(Var::RelayInput);
        let x1 = if f.parents.contains(&Var::SourceInput) {
            get(Var::SourceInput)
        } else {
            get(Var::SourceRelayInput) * dest + get(Var::SourceDestInput)
        };
        for y2 in 0..z.relay_output {
            for y3 in 0..z.dest_output {
                let col = match (
                    f.children.contains(&Var::RelayOutput),
                    f.children.contains(&Var::DestOutput),
                ) {
                    (true, true) => y2 * z.dest_output + y3,
                    (true, false) => y2,
                    _ => y3,
                };
                out[row * cols + col] = out[row * cols + col] + channel.kernel(s, x1, x2, y2, y3);
            }
        }
        row += 1;
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn bsc_relay_channel(p2: f64, p3: f64) -> DmChannel<f64> {
        let sizes = ChannelSizes {
            state: 1,
            source: SourceAlphabet::Split { relay: 2, dest: 2 },
            relay_input: 2,
            relay_output: 2,
            dest_output: 2,
        };
        let bsc = |p: f64, a: usize, b: usize| if a == b { 1.0 - p } else { p };
        DmChannel::from_hyper_links(
            sizes,
            vec![1.0],
            |_, x1r, y2| bsc(p2, x1r, y2),
            |_, _, x2, y3| bsc(p3, x2, y3),
        )
        .unwrap()
    }

    #[test]
    fn var_tokens_round_trip() {
        for v in Var::ALL {
            assert_eq!(v.token().parse::<Var>().unwrap(), v);
        }
        assert_eq!("x_hat".parse::<Var>().unwrap(), Var::RelayCodewordEstimate);
        assert!("Z".parse::<Var>().is_err());
    }

    #[test]
    fn channel_rejects_bad_rows() {
        let sizes = ChannelSizes {
            state: 1,
            source: SourceAlphabet::Single(1),
            relay_input: 1,
            relay_output: 2,
            dest_output: 1,
        };
        assert!(matches!(
            DmChannel::new(sizes, vec![1.0], vec![0.5, 0.6]),
            Err(DmError::NotNormalized { .. })
        ));
        assert!(matches!(
            DmChannel::new(sizes, vec![1.0], vec![1.5, -0.5]),
            Err(DmError::InvalidProbability { .. })
        ));
        assert!(DmChannel::new(sizes, vec![1.0], vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn layout_assembles_valid_joint() {
        let ch = bsc_relay_channel(0.1, 0.2);
        let layout = JointLayout::new(&ch, Template::HyperUpper, &AuxSizes::new()).unwrap();
        assert_eq!(layout.support(), 32);
        let free = layout.uniform_free();
        let joint = layout.assemble(&free).unwrap();
        joint.check_channel(&ch).unwrap();
        let m = joint.marginal(&[Var::RelayInput]).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn factorization_violation_is_detected() {
        // X2 depending on S breaks the converse template of the hyper model.
        let vars = vec![Var::State, Var::RelayInput];
        let pmf = vec![0.5, 0.0, 0.0, 0.5];
        let err = DmJoint::new(vars.clone(), vec![2, 2], pmf, Template::CutSet);
        assert!(matches!(err, Err(DmError::TemplateVariables { .. })));
        let ch = {
            let sizes = ChannelSizes {
                state: 2,
                source: SourceAlphabet::Split { relay: 1, dest: 1 },
                relay_input: 2,
                relay_output: 1,
                dest_output: 1,
            };
            DmChannel::from_fn(sizes, vec![0.5, 0.5], |_, _, _, _, _| 1.0).unwrap()
        };
        let layout = JointLayout::new(&ch, Template::HyperUpper, &AuxSizes::new()).unwrap();
        let good = layout.assemble(&layout.uniform_free()).unwrap();
        let vars = good.variables().to_vec();
        let sizes = good.sizes().to_vec();
        // Put all mass on x2 == s.
        let s_pos = vars.iter().position(|v| *v == Var::State).unwrap();
        let x_pos = vars.iter().position(|v| *v == Var::RelayInput).unwrap();
        let mut pmf = vec![0.0; good.probabilities().len()];
        let mut k = 0;
        for_each_config(&sizes, |d| {
            if d[s_pos] == d[x_pos] {
                pmf[k] = 0.5;
            }
            k += 1;
        });
        let err = DmJoint::new(vars, sizes, pmf, Template::HyperUpper).unwrap_err();
        assert!(matches!(err, DmError::Factorization { .. }), "{err:?}");
    }

    #[test]
    fn relabel_permutes_marginals() {
        let ch = bsc_relay_channel(0.1, 0.2);
        let layout = JointLayout::new(&ch, Template::HyperUpper, &AuxSizes::new()).unwrap();
        let free = vec![
            vec![0.3, 0.7],
            vec![0.9, 0.1, 0.4, 0.6],
            vec![0.5, 0.5, 0.5, 0.5],
        ];
        let joint = layout.assemble(&free).unwrap();
        let swapped = joint.relabel(Var::RelayInput, &[1, 0]).unwrap();
        let m = swapped.marginal(&[Var::RelayInput]).unwrap();
        assert!((m[0] - 0.7).abs() < 1e-15);
        assert!(joint.relabel(Var::RelayInput, &[0, 0]).is_err());
    }
}
