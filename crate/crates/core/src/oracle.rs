//! Independent checks of the Gaussian closed forms.
//!
//! Each `verify_*` builds the jointly Gaussian auxiliary variables of the
//! corresponding coding scheme or converse, evaluates the mutual-information
//! expressions with [`GaussianSystem`], and compares them with the closed
//! forms from [`crate::gauss_bounds`].

use thiserror::Error;

use crate::gauss_bounds::{
    baseline_df_at, cutset_gaussian_at, lb_hyper_at, lb_input_description_at,
    lb_state_description_at, ub_hyper_at, BoundError, GaussianRelayParams, HyperSourceParams,
    StateDescParamPoint,
};
use crate::gauss_mi::{GaussError, GaussianSystem};
use crate::scalar::{lit, Real};

/// Errors raised while building a construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Gauss(#[from] GaussError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// One closed-form term compared against its information-theoretic evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct TermCheck<T> {
    pub name: String,
    pub closed_form: T,
    pub oracle: T,
    pub abs_diff: T,
}

/// A scale factor evaluated at its optimum and at small offsets on each side.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationCheck<T> {
    pub name: String,
    pub at_optimum: T,
    pub below: T,
    pub above: T,
}

/// Outcome of checking one construction at one parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionReport<T> {
    pub id: String,
    pub terms: Vec<TermCheck<T>>,
    pub perturbations: Vec<PerturbationCheck<T>>,
    /// Checks that do not apply at this point, with the reason.
    pub skipped: Vec<String>,
    pub tolerance: T,
    /// Whether every term difference is within `tolerance`.
    pub pass: bool,
}

impl<T: Real> ConstructionReport<T> {
    fn new(id: &str, tolerance: T) -> Self {
        Self {
            id: id.to_string(),
            terms: Vec::new(),
            perturbations: Vec::new(),
            skipped: Vec::new(),
            tolerance,
            pass: true,
        }
    }

    fn term(&mut self, name: &str, closed_form: T, oracle: T) {
        let abs_diff = if closed_form == oracle {
            T::zero()
        } else {
            (closed_form - oracle).abs()
        };
        self.pass &= abs_diff <= self.tolerance;
        self.terms.push(TermCheck {
            name: name.to_string(),
            closed_form,
            oracle,
            abs_diff,
        });
    }

    fn skip(&mut self, what: &str) {
        self.skipped.push(what.to_string());
    }

    fn perturb(&mut self, name: &str, at_optimum: T, below: T, above: T) {
        self.perturbations.push(PerturbationCheck {
            name: name.to_string(),
            at_optimum,
            below,
            above,
        });
    }

    /// Largest term difference, zero if no terms were checked.
    pub fn max_diff(&self) -> T {
        self.terms.iter().fold(T::zero(), |m, t| m.max(t.abs_diff))
    }

    /// Whether no perturbed scale factor beats its optimum by more than the tolerance.
    pub fn perturbations_ok(&self) -> bool {
        self.perturbations.iter().all(|p| {
            p.below <= p.at_optimum + self.tolerance && p.above <= p.at_optimum + self.tolerance
        })
    }

    /// Term agreement and local optimality together.
    pub fn ok(&self) -> bool {
        self.pass && self.perturbations_ok()
    }
}

const PERTURBATION: f64 = 1e-3;

fn sq<T: Real>(x: T) -> T {
    x * x
}

/// `I(U;Y) - I(U;state)`, with the second term zero when the state is constant.
fn binning_rate<T: Real>(
    sys: &GaussianSystem<T>,
    u: &str,
    y: &str,
    state: &str,
) -> Result<T, GaussError> {
    let a = sys.mutual_information(&[u], &[y])?;
    if is_constant(sys, state)? {
        return Ok(a);
    }
    Ok(a - sys.mutual_information(&[u], &[state])?)
}

fn concat<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    a.iter().chain(b).copied().collect()
}

fn is_constant<T: Real>(sys: &GaussianSystem<T>, v: &str) -> Result<bool, GaussError> {
    Ok(!(sys.variance(v)? > lit::<T>(1e-300)))
}

fn positive<T: Real>(name: &str, v: T) -> Result<(), OracleError> {
    if v > T::zero() {
        Ok(())
    } else {
        Err(OracleError::Precondition(format!(
            "{name} must be positive"
        )))
    }
}

/// Checks the input-description scheme at power fraction `gamma`.
///
/// The relay input is a quantized copy of a source-chosen input `X`; the relay
/// learns the quantization index through a binned auxiliary `UR`.
pub fn verify_input_description<T: Real>(
    p: &GaussianRelayParams<T>,
    gamma: T,
    tol: T,
) -> Result<ConstructionReport<T>, OracleError> {
    p.validate()?;
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(OracleError::Precondition("gamma must lie in (0, 1]".into()));
    }
    positive("N2", p.n2)?;
    positive("P1", p.p1)?;
    positive("P2", p.p2)?;
    positive("Q", p.q)?;
    let closed = lb_input_description_at(p, gamma)?;
    let one = T::one();
    let gbar = one - gamma;
    let d = p.p2 * p.n2 / (p.n2 + gamma * p.p1);
    let a = one - d / p.p2;
    let lead = (gbar * p.p1 / p.p2).sqrt();
    let g = sq((gbar * p.p1).sqrt() + (p.p2 - d).sqrt());
    let alpha = g / (g + p.n3 + d + gamma * p.p1);
    let alpha_r = gamma * p.p1 / (gamma * p.p1 + p.n2);
    let xi = lead + ((p.p2 - d) / p.p2).sqrt();

    let base = GaussianSystem::new()
        .add_independent("S", p.q)?
        .add_independent("X", p.p2)?
        .add_independent("X1R", gamma * p.p1)?
        .add_independent("Z2", p.n2)?
        .add_independent("Z3", p.n3)?
        .extend_linear("Xh", &[("X", a)], d * (one - d / p.p2))?;
    let sys = base
        .extend_linear("X2", &[("Xh", (p.p2 / (p.p2 - d)).sqrt())], T::zero())?
        .extend_linear("X1", &[("X1R", one), ("X", lead)], T::zero())?
        .extend_linear("Y2", &[("X1", one), ("S", one), ("Z2", one)], T::zero())?
        .extend_linear(
            "Y3",
            &[("X1", one), ("X2", one), ("S", one), ("Z3", one)],
            T::zero(),
        )?
        .extend_linear(
            "UR",
            &[("X1R", one), ("S", alpha_r), ("X", alpha_r * lead)],
            T::zero(),
        )?;
    let with_u = |scale: T| sys.extend_linear("U", &[("X", xi), ("S", scale)], T::zero());
    let dest =
        |scale: T| -> Result<T, GaussError> { binning_rate(&with_u(scale)?, "U", "Y3", "S") };

    let mut rep = ConstructionReport::new("input_description", tol);
    rep.term("destination_rate", closed.rate, dest(alpha)?);
    let quant = sys.mutual_information(&["X"], &["Xh"])?;
    rep.term(
        "quantization_rate",
        lit::<T>(0.5) * (p.p2 / d).log2(),
        quant,
    );
    let s = with_u(alpha)?;
    let relay = s.mutual_information(&["UR"], &["Y2"])?
        - s.mutual_information(&["UR"], &["S"])?
        - s.conditional_mi(&["UR"], &["U"], &["S"])?;
    rep.term(
        "relay_rate",
        lit::<T>(0.5) * (one + gamma * p.p1 / p.n2).log2(),
        relay,
    );
    let eps = lit::<T>(PERTURBATION);
    rep.perturb(
        "destination_scale",
        dest(alpha)?,
        dest(alpha - eps)?,
        dest(alpha + eps)?,
    );
    let relay_at = |k: T| -> Result<T, GaussError> {
        let s = base
            .extend_linear("X1", &[("X1R", one), ("X", lead)], T::zero())?
            .extend_linear("Y2", &[("X1", one), ("S", one), ("Z2", one)], T::zero())?
            .extend_linear("UR", &[("X1R", one), ("S", k), ("X", k * lead)], T::zero())?
            .extend_linear("J", &[("S", one), ("X", lead)], T::zero())?;
        binning_rate(&s, "UR", "Y2", "J")
    };
    rep.perturb(
        "relay_scale",
        relay_at(alpha_r)?,
        relay_at(alpha_r - eps)?,
        relay_at(alpha_r + eps)?,
    );
    Ok(rep)
}

/// Checks the state-description scheme at a fixed parameter point.
///
/// The source sends a quantized state description to the relay, and both
/// transmitters then cooperate against the known part of the state. Decoded
/// codewords are removed from the channel outputs explicitly before each
/// subsequent rate is evaluated.
pub fn verify_state_description<T: Real>(
    p: &GaussianRelayParams<T>,
    pt: &StateDescParamPoint<T>,
    tol: T,
) -> Result<ConstructionReport<T>, OracleError> {
    p.validate()?;
    positive("Q", p.q)?;
    positive("P2", p.p2)?;
    let closed = lb_state_description_at(p, pt)?;
    let det = |k: &str| closed.detail(k).expect("state-description detail");
    let one = T::one();
    let zero = T::zero();
    let half = lit::<T>(0.5);

    // Closed-form side, re-derived here from the scheme's definitions.
    let theta_r = pt.theta * pt.p1r;
    let free_r = (one - pt.theta) * pt.p1r;
    let d = if theta_r > zero {
        p.q * (p.n2 + pt.p1d) / (p.n2 + theta_r + pt.p1d)
    } else {
        p.q
    };
    let xi = one + pt.rho1s * (free_r / p.q).sqrt();
    let p_prime = (one - sq(pt.rho12) - sq(pt.rho1s)).max(zero) * free_r;
    let gain = pt.rho12 * (free_r / p.p2).sqrt() + one;
    let den3 = p.n3 + sq(xi) * d + theta_r + p_prime + pt.p1d;
    let alpha2 = sq(gain) * p.p2 / (sq(gain) * p.p2 + den3);
    let alpha = pt.alpha;
    let kappa = theta_r / (theta_r + p.n2 + pt.p1d);
    let lambda = pt.p1d / (pt.p1d + p.n3 + theta_r);

    let a = one - d / p.q;
    let sys = GaussianSystem::new()
        .add_independent("S", p.q)?
        .add_independent("St", d * (one - d / p.q))?
        .add_independent("X2", p.p2)?
        .add_independent("XSR", theta_r)?
        .add_independent("Xp", p_prime)?
        .add_independent("XWD", pt.p1d)?
        .add_independent("Z2", p.n2)?
        .add_independent("Z3", p.n3)?
        .extend_linear("Sh", &[("S", a), ("St", one)], zero)?;
    let rho1s_c = if p.q > zero {
        pt.rho1s * (free_r / p.q).sqrt()
    } else {
        zero
    };
    let rho12_c = pt.rho12 * (free_r / p.p2).sqrt();
    let sys = sys
        .extend_linear("XWR", &[("S", rho1s_c), ("X2", rho12_c), ("Xp", one)], zero)?
        .extend_linear("X1", &[("XSR", one), ("XWR", one), ("XWD", one)], zero)?
        .extend_linear("Y2", &[("X1", one), ("S", one), ("Z2", one)], zero)?
        .extend_linear(
            "Y3",
            &[("X1", one), ("X2", one), ("S", one), ("Z3", one)],
            zero,
        )?
        .extend_linear("T", &[("S", xi), ("Sh", -xi * alpha2)], zero)?
        .extend_linear("U", &[("Xp", one), ("T", alpha)], zero)?
        // Relay output with the relay input and the state estimate removed.
        .extend_linear(
            "Y2p",
            &[("Y2", one), ("X2", -rho12_c), ("Sh", -alpha2 * xi)],
            zero,
        )?
        // Destination output with the cooperative codeword removed.
        .extend_linear(
            "Y3p",
            &[("Y3", one), ("X2", -gain), ("Sh", -alpha2 * xi)],
            zero,
        )?
        // Outputs after the fresh-information codeword is removed as well.
        .extend_linear(
            "Y2b",
            &[
                ("Y2p", one),
                ("U", -one),
                ("Sh", (one - alpha) * alpha2 * xi),
            ],
            zero,
        )?
        .extend_linear("Y3b", &[("Y3p", one), ("U", -one)], zero)?
        .extend_linear("TR", &[("S", xi * (one - alpha))], zero)?
        .extend_linear("TD", &[("T", one - alpha)], zero)?;

    let mut rep = ConstructionReport::new("state_description", tol);
    rep.term("D", det("D"), d);
    rep.term("xi", det("xi"), xi);
    rep.term("alpha2", det("alpha2"), alpha2);
    if xi != zero {
        rep.term("Q_tilde", det("Q_tilde"), sys.variance("T")? / sq(xi));
    } else {
        rep.skip("Q_tilde: the effective state vanishes");
    }

    if p_prime > zero {
        rep.term("relay", det("relay"), binning_rate(&sys, "U", "Y2p", "T")?);
        rep.term(
            "mac_dpc",
            det("mac_dpc"),
            binning_rate(&sys, "U", "Y3p", "T")?,
        );
    } else {
        rep.skip("relay and mac_dpc: no power left for the fresh codeword");
    }

    let coop_at = |scale: T| -> Result<T, GaussError> {
        let s = sys.extend_linear("V", &[("X2", gain), ("Sh", scale * xi)], zero)?;
        binning_rate(&s, "V", "Y3", "Sh")
    };
    let eps = lit::<T>(PERTURBATION);
    rep.term("mac_coop", det("mac_coop"), coop_at(alpha2)?);
    rep.perturb(
        "cooperative_scale",
        coop_at(alpha2)?,
        coop_at(alpha2 - eps)?,
        coop_at(alpha2 + eps)?,
    );

    if pt.p1d > zero {
        let direct_at = |k: T| -> Result<T, GaussError> {
            let s = sys.extend_linear("U1", &[("XWD", one), ("TD", k)], zero)?;
            binning_rate(&s, "U1", "Y3b", "TD")
        };
        rep.term("direct", det("direct"), direct_at(lambda)?);
        rep.perturb(
            "direct_scale",
            direct_at(lambda)?,
            direct_at(lambda - eps)?,
            direct_at(lambda + eps)?,
        );
    } else {
        rep.skip("direct: no destination-only power");
    }

    if theta_r > zero {
        let desc_at = |k: T| -> Result<T, GaussError> {
            let s = sys.extend_linear("UR", &[("XSR", one), ("TR", k)], zero)?;
            binning_rate(&s, "UR", "Y2b", "S")
        };
        let target = half * (p.q / d).log2();
        rep.term("description_decoding", target, desc_at(kappa)?);
        rep.term(
            "description_quantization",
            target,
            sys.mutual_information(&["S"], &["Sh"])?,
        );
        rep.perturb(
            "description_scale",
            desc_at(kappa)?,
            desc_at(kappa - eps)?,
            desc_at(kappa + eps)?,
        );
    } else {
        rep.skip("description: theta * P1r = 0, no state description");
    }
    let (relay, mac) = (det("relay"), det("mac_dpc") + det("mac_coop"));
    rep.term("rate", closed.rate, relay.min(mac) + det("direct"));
    Ok(rep)
}

fn hyper_base<T: Real>(
    h: &HyperSourceParams<T>,
    rho12: T,
    rho1s: T,
) -> Result<GaussianSystem<T>, OracleError> {
    h.validate()?;
    if h.q == T::zero() && rho1s != T::zero() {
        return Err(OracleError::Precondition(
            "state correlation requires Q > 0".into(),
        ));
    }
    positive("P1R", h.p1r)?;
    positive("P1D", h.p1d)?;
    positive("P2", h.p2)?;
    positive("N2", h.n2)?;
    let zeta = T::one() - sq(rho12) - sq(rho1s);
    if zeta < -lit::<T>(1e-12) {
        return Err(
            BoundError::CorrelationConstraint((sq(rho12) + sq(rho1s)).to_f64_lossy()).into(),
        );
    }
    let one = T::one();
    let zero = T::zero();
    let mut sys = GaussianSystem::new()
        .add_independent("X2", h.p2)?
        .add_independent("X1R", h.p1r)?
        .add_independent("Xp", h.p1d * zeta.max(zero))?
        .add_independent("Z2", h.n2)?
        .add_independent("Z3", h.n3)?;
    let mut x1d = vec![("X2", rho12 * (h.p1d / h.p2).sqrt()), ("Xp", one)];
    let mut y2 = vec![("X1R", one), ("Z2", one)];
    if h.q > zero {
        sys = sys.add_independent("S", h.q)?;
        x1d.push(("S", rho1s * (h.p1d / h.q).sqrt()));
        y2.push(("S", one));
    }
    let sys = sys
        .extend_linear("X1D", &x1d, zero)?
        .extend_linear("Y2", &y2, zero)?;
    let mut y3 = vec![("X1D", one), ("X2", one), ("Z3", one)];
    if h.q > zero {
        y3.push(("S", one));
    }
    Ok(sys.extend_linear("Y3", &y3, zero)?)
}

/// Checks the hyper-source upper bound against the jointly Gaussian inputs
/// that maximize its information expressions.
pub fn verify_hyper_converse<T: Real>(
    h: &HyperSourceParams<T>,
    rho12: T,
    rho1s: T,
    tol: T,
) -> Result<ConstructionReport<T>, OracleError> {
    let closed = ub_hyper_at(h, rho12, rho1s)?;
    let sys = hyper_base(h, rho12, rho1s)?;
    let state: &[&str] = if h.q > T::zero() { &["S"] } else { &[] };
    let private = sys.conditional_mi(&["X1D"], &["Y3"], &concat(&["X2"], state))?;
    let relay = sys.conditional_mi(&["X1R"], &["Y2"], state)?;
    let mac = sys.mutual_information(&["X2"], &["Y3"])?;
    let mut rep = ConstructionReport::new("hyper_converse", tol);
    rep.term(
        "private",
        closed.detail("private").unwrap_or_default(),
        private,
    );
    rep.term(
        "term_relay",
        closed.detail("term_relay").unwrap_or_default(),
        relay + private,
    );
    rep.term(
        "term_mac",
        closed.detail("term_mac").unwrap_or_default(),
        mac + private,
    );
    Ok(rep)
}

/// Checks the hyper-source lower bound against its achievability construction.
pub fn verify_hyper_achievability<T: Real>(
    h: &HyperSourceParams<T>,
    rho12: T,
    rho1s: T,
    tol: T,
) -> Result<ConstructionReport<T>, OracleError> {
    let closed = lb_hyper_at(h, rho12, rho1s)?;
    let sys = hyper_base(h, rho12, rho1s)?;
    let one = T::one();
    let zeta = (one - sq(rho12) - sq(rho1s)).max(T::zero());
    let mut rep = ConstructionReport::new("hyper_achievability", tol);
    let private_closed = closed.detail("private").unwrap_or_default();
    if zeta * h.p1d > T::zero() {
        let corr = if h.q > T::zero() {
            rho1s * (h.p1d / h.q).sqrt()
        } else {
            T::zero()
        };
        let alpha = h.p1d * zeta / (h.p1d * zeta + h.n3);
        let alpha_opt = alpha * (one + corr) - corr;
        let dpc_at = |k: T| -> Result<T, GaussError> {
            let mut c = vec![("X1D", one), ("X2", -rho12 * (h.p1d / h.p2).sqrt())];
            if h.q > T::zero() {
                c.push(("S", k));
            }
            let s = sys.extend_linear("U1", &c, T::zero())?;
            let gain = s.conditional_mi(&["U1"], &["Y3"], &["X1R", "X2"])?;
            if h.q > T::zero() {
                Ok(gain - s.conditional_mi(&["U1"], &["S"], &["X1R", "X2"])?)
            } else {
                Ok(gain)
            }
        };
        rep.term("private", private_closed, dpc_at(alpha_opt)?);
        if h.q > T::zero() {
            let eps = lit::<T>(PERTURBATION);
            rep.perturb(
                "private_scale",
                dpc_at(alpha_opt)?,
                dpc_at(alpha_opt - eps)?,
                dpc_at(alpha_opt + eps)?,
            );
        }
    } else {
        rep.term("private", private_closed, T::zero());
        rep.skip("private codeword: no uncorrelated destination power");
    }
    rep.term(
        "relay",
        closed.detail("relay").unwrap_or_default(),
        sys.conditional_mi(&["X1R"], &["Y2"], &["X2"])?,
    );
    rep.term(
        "mac",
        closed.detail("mac").unwrap_or_default(),
        sys.mutual_information(&["X2"], &["Y3"])?,
    );
    Ok(rep)
}

/// Checks the cut-set bound and the state-as-noise decode-and-forward rate at
/// input correlation `rho`.
pub fn verify_cutset_and_baseline<T: Real>(
    p: &GaussianRelayParams<T>,
    rho: T,
    tol: T,
) -> Result<ConstructionReport<T>, OracleError> {
    let cut = cutset_gaussian_at(p, rho)?;
    let base = baseline_df_at(p, rho)?;
    positive("P1", p.p1)?;
    positive("N2", p.n2)?;
    let one = T::one();
    let zero = T::zero();
    let has_relay = p.p2 > zero;
    let has_state = p.q > zero;
    if !has_relay && rho != zero {
        return Err(OracleError::Precondition(
            "input correlation requires P2 > 0".into(),
        ));
    }
    let mut sys = GaussianSystem::new()
        .add_independent("Z2", p.n2)?
        .add_independent("Z3", p.n3)?
        .add_independent("Xp", (one - sq(rho)) * p.p1)?;
    let mut x1 = vec![("Xp", one)];
    let mut y2 = vec![("X1", one), ("Z2", one)];
    let mut y3 = vec![("X1", one), ("Z3", one)];
    if has_relay {
        sys = sys.add_independent("X2", p.p2)?;
        x1.push(("X2", rho * (p.p1 / p.p2).sqrt()));
        y3.push(("X2", one));
    }
    if has_state {
        sys = sys.add_independent("S", p.q)?;
        y2.push(("S", one));
        y3.push(("S", one));
    }
    let sys = sys
        .extend_linear("X1", &x1, zero)?
        .extend_linear("Y2", &y2, zero)?
        .extend_linear("Y3", &y3, zero)?;
    let state: Vec<&str> = if has_state { vec!["S"] } else { vec![] };
    let relay_in: Vec<&str> = if has_relay { vec!["X2"] } else { vec![] };

    // Joint inputs are handled through the chain rule so that full correlation
    // (X1 a multiple of X2) does not make the input block singular.
    let mac_info = |cond: &[&str]| -> Result<T, GaussError> {
        if has_relay {
            Ok(sys.conditional_mi(&["X2"], &["Y3"], cond)?
                + sys.conditional_mi(&["X1"], &["Y3"], &concat(cond, &["X2"]))?)
        } else {
            sys.conditional_mi(&["X1"], &["Y3"], cond)
        }
    };
    let mut rep = ConstructionReport::new("cutset_and_baseline", tol);
    let bc = sys.conditional_mi(&["X1"], &["Y2", "Y3"], &concat(&state, &relay_in))?;
    rep.term("cutset_relay", cut.detail("relay").unwrap_or_default(), bc);
    rep.term(
        "cutset_mac",
        cut.detail("mac").unwrap_or_default(),
        mac_info(&state)?,
    );
    let relay = sys.conditional_mi(&["X1"], &["Y2"], &relay_in)?;
    rep.term(
        "baseline_relay",
        base.detail("relay").unwrap_or_default(),
        relay,
    );
    rep.term(
        "baseline_mac",
        base.detail("mac").unwrap_or_default(),
        mac_info(&[])?,
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_description_unit_point() {
        let p = GaussianRelayParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let r = verify_input_description(&p, 0.5, 1e-9).unwrap();
        assert!(r.ok(), "{r:?}");
        let r = verify_input_description(&p, 1.0, 1e-9).unwrap();
        assert!(r.ok(), "{r:?}");
        let p0 = GaussianRelayParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(verify_input_description(&p0, 0.5, 1e-9).is_err());
    }

    #[test]
    fn hyper_converse_full_correlation() {
        let h = HyperSourceParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let r = verify_hyper_converse(&h, 1.0, 0.0, 1e-9).unwrap();
        assert!(r.ok(), "{r:?}");
        assert_eq!(r.terms[0].oracle, 0.0);
        let h0 = HyperSourceParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(verify_hyper_converse(&h0, 0.0, -0.3, 1e-9).is_err());
    }

    #[test]
    fn cutset_full_correlation() {
        let p = GaussianRelayParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let r = verify_cutset_and_baseline(&p, 1.0, 1e-9).unwrap();
        assert!(r.ok(), "{r:?}");
        assert_eq!(r.terms[0].oracle, 0.0);
    }
}
