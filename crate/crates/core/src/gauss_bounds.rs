//! Closed-form rates for the Gaussian relay models and their optimized values.
//!
//! All powers and variances are linear scale; rates are bits per channel use.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::optimize::{maximize, Dim, GridConfig, OptimizeError, SearchBox};
use crate::scalar::{awgn, half_log2, lit, ratio, Real};

/// Errors raised by the Gaussian bound evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("invalid parameter `{name}` = {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("noise variance must be positive, got {0}")]
    NonPositiveNoise(f64),
    #[error("correlations violate rho12^2 + rho1s^2 <= 1 ({0})")]
    CorrelationConstraint(f64),
    #[error("power split exceeds the source budget")]
    PowerBudget,
    #[error("side conditions violated (relay term {relay}, destination term {destination})")]
    FeasibilityViolation { relay: f64, destination: f64 },
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
}

fn check_param<T: Real>(name: &'static str, v: T) -> Result<(), BoundError> {
    if v.is_finite() && v >= T::zero() {
        Ok(())
    } else {
        Err(BoundError::InvalidParam {
            name,
            value: v.to_f64_lossy(),
        })
    }
}

fn check_unit<T: Real>(name: &'static str, v: T, lo: f64, hi: f64) -> Result<(), BoundError> {
    if v >= lit(lo) && v <= lit(hi) {
        Ok(())
    } else {
        Err(BoundError::InvalidParam {
            name,
            value: v.to_f64_lossy(),
        })
    }
}

/// Parameters of the general Gaussian relay channel with state at the source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianRelayParams<T> {
    /// Source power.
    pub p1: T,
    /// Relay power.
    pub p2: T,
    /// Relay noise variance.
    pub n2: T,
    /// Destination noise variance.
    pub n3: T,
    /// State variance.
    pub q: T,
}

impl<T: Real> GaussianRelayParams<T> {
    pub fn new(p1: T, p2: T, n2: T, n3: T, q: T) -> Result<Self, BoundError> {
        let p = Self { p1, p2, n2, n3, q };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        check_param("P1", self.p1)?;
        check_param("P2", self.p2)?;
        check_param("N2", self.n2)?;
        check_param("N3", self.n3)?;
        check_param("Q", self.q)?;
        if !(self.n3 > T::zero()) {
            return Err(BoundError::NonPositiveNoise(self.n3.to_f64_lossy()));
        }
        Ok(())
    }
}

/// Parameters of the model whose source input splits into a relay-bound
/// component without state knowledge and a destination-bound informed component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperSourceParams<T> {
    pub p1r: T,
    pub p1d: T,
    pub p2: T,
    pub n2: T,
    pub n3: T,
    pub q: T,
}

impl<T: Real> HyperSourceParams<T> {
    pub fn new(p1r: T, p1d: T, p2: T, n2: T, n3: T, q: T) -> Result<Self, BoundError> {
        let h = Self {
            p1r,
            p1d,
            p2,
            n2,
            n3,
            q,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        check_param("P1R", self.p1r)?;
        check_param("P1D", self.p1d)?;
        check_param("P2", self.p2)?;
        check_param("N2", self.n2)?;
        check_param("N3", self.n3)?;
        check_param("Q", self.q)?;
        if !(self.n3 > T::zero()) {
            return Err(BoundError::NonPositiveNoise(self.n3.to_f64_lossy()));
        }
        Ok(())
    }

    /// The general model with the source power pooled, `P1 = P1R + P1D`.
    pub fn pooled(&self) -> GaussianRelayParams<T> {
        GaussianRelayParams {
            p1: self.p1r + self.p1d,
            p2: self.p2,
            n2: self.n2,
            n3: self.n3,
            q: self.q,
        }
    }
}

/// Free parameters of the state-description scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDescParamPoint<T> {
    /// Power of the relay-directed source component.
    pub p1r: T,
    /// Power of the destination-directed source component.
    pub p1d: T,
    /// Fraction of `p1r` spent describing the state to the relay.
    pub theta: T,
    /// Correlation of the source with the relay input.
    pub rho12: T,
    /// Correlation of the source with the state.
    pub rho1s: T,
    /// Dirty-paper scaling factor.
    pub alpha: T,
}

/// Which term of a two-term minimum determines a rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActiveTerm {
    RelayCut,
    MacCut,
    Unconstrained,
}

impl ActiveTerm {
    pub fn as_str(self) -> &'static str {
        match self {
            ActiveTerm::RelayCut => "relay-cut",
            ActiveTerm::MacCut => "mac-cut",
            ActiveTerm::Unconstrained => "unconstrained",
        }
    }

    fn of<T: Real>(relay: T, mac: T) -> Self {
        if relay <= mac {
            ActiveTerm::RelayCut
        } else {
            ActiveTerm::MacCut
        }
    }
}

/// A rate with its maximizing parameters and intermediate quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult<T> {
    pub rate: T,
    pub argmax: Vec<(String, T)>,
    pub active_term: ActiveTerm,
    pub details: Vec<(String, T)>,
}

impl<T: Real> BoundResult<T> {
    fn new(rate: T, active_term: ActiveTerm, argmax: &[(&str, T)], details: &[(&str, T)]) -> Self {
        let own = |v: &[(&str, T)]| v.iter().map(|(k, x)| (k.to_string(), *x)).collect();
        Self {
            rate,
            argmax: own(argmax),
            active_term,
            details: own(details),
        }
    }

    /// Looks up a named intermediate value.
    pub fn detail(&self, name: &str) -> Option<T> {
        self.details
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }

    /// Looks up a named coordinate of the maximizing point.
    pub fn param(&self, name: &str) -> Option<T> {
        self.argmax.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

fn sq<T: Real>(x: T) -> T {
    x * x
}

fn sqrt0<T: Real>(x: T) -> T {
    x.max(T::zero()).sqrt()
}

/// Rate of dirty-paper coding with scaling `alpha`, without argument checks.
pub(crate) fn dpc_rate_raw<T: Real>(alpha: T, p: T, q: T, n: T) -> T {
    if !(p > T::zero()) {
        return T::zero();
    }
    let num = p * (p + q + n);
    let den = p * q * sq(T::one() - alpha) + n * (p + sq(alpha) * q);
    half_log2(ratio(num, den))
}

/// Rate `0.5 log2(P(P+Q+N) / (PQ(1-a)^2 + N(P + a^2 Q)))` achieved by a
/// dirty-paper code with scaling `alpha`, signal power `p`, state variance `q`
/// and noise variance `n`. Zero signal power gives rate 0.
pub fn dpc_rate<T: Real>(alpha: T, p: T, q: T, n: T) -> Result<T, BoundError> {
    if !(n > T::zero()) {
        return Err(BoundError::NonPositiveNoise(n.to_f64_lossy()));
    }
    check_param("P", p)?;
    check_param("Q", q)?;
    Ok(dpc_rate_raw(alpha, p, q, n))
}

/// Variance `(1-t)^2 Q - t(t-2) D` of the state left after subtracting a
/// `t`-scaled estimate with distortion `D`.
pub fn residual_state_variance<T: Real>(t: T, q: T, d: T) -> T {
    sq(T::one() - t) * q - t * (t - lit(2.0)) * d
}

fn dense_1d<T: Real>(name: &str, lo: f64, hi: f64, cfg: &GridConfig) -> SearchBox<T> {
    SearchBox::new(vec![Dim::new(name, lit(lo), lit(hi))])
        .with_steps(201)
        .with_rounds(8)
        .with_shrink(lit(0.1))
        .configured(cfg)
}

// ---------------------------------------------------------------------------
// Input-description scheme

fn input_desc_eval<T: Real>(p: &GaussianRelayParams<T>, gamma: T) -> (T, T) {
    let den = p.n2 + gamma * p.p1;
    let d = if den > T::zero() {
        p.p2 * p.n2 / den
    } else {
        T::zero()
    };
    let gbar = T::one() - gamma;
    let signal = sq(sqrt0(gbar * p.p1) + sqrt0(p.p2 - d));
    (awgn(signal / (p.n3 + d + gamma * p.p1)), d)
}

/// Input-description rate at a fixed relay power fraction `gamma`.
pub fn lb_input_description_at<T: Real>(
    p: &GaussianRelayParams<T>,
    gamma: T,
) -> Result<BoundResult<T>, BoundError> {
    p.validate()?;
    check_unit("gamma", gamma, 0.0, 1.0)?;
    let (rate, d) = input_desc_eval(p, gamma);
    Ok(BoundResult::new(
        rate,
        ActiveTerm::Unconstrained,
        &[("gamma", gamma)],
        &[("D", d)],
    ))
}

/// Input-description rate maximized over `gamma` in `[0, 1]`.
pub fn lb_input_description<T: Real>(
    p: &GaussianRelayParams<T>,
) -> Result<BoundResult<T>, BoundError> {
    lb_input_description_with(p, &GridConfig::default())
}

pub fn lb_input_description_with<T: Real>(
    p: &GaussianRelayParams<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    p.validate()?;
    let sb = dense_1d("gamma", 0.0, 1.0, cfg);
    let best = maximize(|x: &[T]| Some(input_desc_eval(p, x[0]).0), &sb)?;
    lb_input_description_at(p, best.argmax[0])
}

// ---------------------------------------------------------------------------
// State-description scheme

/// Quantities of the state-description scheme that do not depend on `alpha`.
#[derive(Clone, Copy, Debug)]
struct StateShape<T> {
    d: T,
    xi: T,
    alpha2: T,
    q_tilde: T,
    p_prime: T,
    coop: T,
    direct: T,
    relay_noise: T,
    dest_noise: T,
}

impl<T: Real> StateShape<T> {
    fn new(p: &GaussianRelayParams<T>, p1r: T, p1d: T, theta: T, rho12: T, rho1s: T) -> Self {
        let rho1s = if p.q > T::zero() { rho1s } else { T::zero() };
        let tr = theta * p1r;
        let wr = (T::one() - theta) * p1r;
        let den = p.n2 + tr + p1d;
        let d = if tr > T::zero() && den > T::zero() {
            p.q * (p.n2 + p1d) / den
        } else {
            p.q
        };
        let xi = if p.q > T::zero() {
            T::one() + rho1s * (wr / p.q).sqrt()
        } else {
            T::one()
        };
        let p_prime = (T::one() - sq(rho12) - sq(rho1s)).max(T::zero()) * wr;
        let g2 = sq(rho12 * sqrt0(wr) + sqrt0(p.p2));
        let den3 = p.n3 + sq(xi) * d + tr + p_prime + p1d;
        let alpha2 = g2 / (g2 + den3);
        let q_tilde = residual_state_variance(alpha2, p.q, d).max(T::zero());
        Self {
            d,
            xi,
            alpha2,
            q_tilde,
            p_prime,
            coop: awgn(g2 / den3),
            direct: awgn(p1d / (p.n3 + tr)),
            relay_noise: p.n2 + tr + p1d,
            dest_noise: p.n3 + tr + p1d,
        }
    }

    fn state_var(&self) -> T {
        sq(self.xi) * self.q_tilde
    }

    fn relay(&self, alpha: T) -> T {
        dpc_rate_raw(alpha, self.p_prime, self.state_var(), self.relay_noise)
    }

    fn dest_dpc(&self, alpha: T) -> T {
        dpc_rate_raw(alpha, self.p_prime, self.state_var(), self.dest_noise)
    }

    fn mac(&self, alpha: T) -> T {
        self.dest_dpc(alpha) + self.coop
    }

    /// Point in `[a_r, a_m]` where the relay and destination terms are equal.
    ///
    /// Equating the two rates gives a quadratic in `alpha`; bisection is the
    /// fallback when rounding pushes the root outside the bracket.
    fn crossing(&self, a_r: T, a_m: T) -> T {
        let (p, q) = (self.p_prime, self.state_var());
        let (nr, nm) = (self.relay_noise, self.dest_noise);
        let two = lit::<T>(2.0);
        let k = two.powf(two * self.coop);
        let ar = p * (p + q + nr);
        let am = k * p * (p + q + nm);
        let a = q * (ar * (p + nm) - am * (p + nr));
        let b = -two * p * q * (ar - am);
        let c = ar * p * (q + nm) - am * p * (q + nr);
        let (lo, hi) = (a_r.min(a_m), a_r.max(a_m));
        let h = |x: T| self.relay(x) - self.mac(x);
        let disc = b * b - lit::<T>(4.0) * a * c;
        if disc >= T::zero() && a != T::zero() {
            let sq = disc.sqrt();
            let r1 = if b >= T::zero() {
                (-b - sq) / (two * a)
            } else {
                (-b + sq) / (two * a)
            };
            let r2 = if r1 != T::zero() {
                c / (a * r1)
            } else {
                -b / a - r1
            };
            let slack = (hi - lo) * lit(1e-9);
            for r in [r1, r2] {
                if r >= lo - slack && r <= hi + slack {
                    return r.max(lo).min(hi);
                }
            }
        }
        let (mut x0, mut x1) = (a_r, a_m);
        for _ in 0..200 {
            let mid = (x0 + x1) * lit(0.5);
            if mid == x0 || mid == x1 {
                break;
            }
            if h(mid) > T::zero() {
                x0 = mid;
            } else {
                x1 = mid;
            }
        }
        if self.objective(x0) >= self.objective(x1) {
            x0
        } else {
            x1
        }
    }

    /// Interval of `alpha` where `dpc_rate(alpha, P', state, noise) >= -slack`.
    fn rate_interval(&self, noise: T, slack: T) -> Option<(T, T)> {
        let (p, q) = (self.p_prime, self.state_var());
        let two = lit::<T>(2.0);
        let bound = p * (p + q + noise) * two.powf(two * slack);
        let a = q * (p + noise);
        let b = -two * p * q;
        let c = p * (q + noise) - bound;
        if !(a > T::zero()) {
            return (c <= T::zero()).then(|| (T::neg_infinity(), T::infinity()));
        }
        let disc = b * b - lit::<T>(4.0) * a * c;
        if disc < T::zero() {
            return None;
        }
        let sq = disc.sqrt();
        Some(((-b - sq) / (two * a), (-b + sq) / (two * a)))
    }

    /// Interval of `alpha` in the search window satisfying both side conditions.
    fn feasible_interval(&self) -> Option<(T, T)> {
        let (r0, r1) = self.rate_interval(self.relay_noise, T::zero())?;
        let (m0, m1) = self.rate_interval(self.dest_noise, self.direct)?;
        let lo = r0.max(m0).max(lit(-1.0));
        let hi = r1.min(m1).min(lit(2.0));
        (lo <= hi).then_some((lo, hi))
    }

    fn feasible(&self, alpha: T) -> bool {
        let slack = -lit::<T>(1e-12);
        self.relay(alpha) >= slack && self.dest_dpc(alpha) + self.direct >= slack
    }

    fn objective(&self, alpha: T) -> T {
        self.relay(alpha).min(self.mac(alpha))
    }

    /// Best feasible `alpha` in `[-1, 2]`.
    ///
    /// Both terms are unimodal in `alpha` with peaks at the Costa factors for
    /// their noise levels, so the unconstrained optimum is one of the peaks or
    /// the crossing between them. The minimum of the two is quasi-concave, so
    /// the constrained optimum is that point clamped to the feasible interval.
    fn best_alpha(&self) -> Option<T> {
        let p = self.p_prime;
        if !(p > T::zero()) {
            return Some(T::zero());
        }
        let a_r = ratio(p, p + self.relay_noise);
        let a_m = ratio(p, p + self.dest_noise);
        let h = |a: T| self.relay(a) - self.mac(a);
        let cand = if h(a_r) <= T::zero() {
            a_r
        } else if h(a_m) >= T::zero() {
            a_m
        } else {
            self.crossing(a_r, a_m)
        };
        let (lo, hi) = self.feasible_interval()?;
        Some(cand.max(lo).min(hi))
    }
}

fn check_state_point<T: Real>(
    p: &GaussianRelayParams<T>,
    pt: &StateDescParamPoint<T>,
) -> Result<(), BoundError> {
    check_param("P1r", pt.p1r)?;
    check_param("P1d", pt.p1d)?;
    check_unit("theta", pt.theta, 0.0, 1.0)?;
    check_unit("rho12", pt.rho12, 0.0, 1.0)?;
    check_unit("rho1s", pt.rho1s, -1.0, 0.0)?;
    if !pt.alpha.is_finite() {
        return Err(BoundError::InvalidParam {
            name: "alpha",
            value: pt.alpha.to_f64_lossy(),
        });
    }
    let c = sq(pt.rho12) + sq(pt.rho1s);
    if c > T::one() + lit(1e-12) {
        return Err(BoundError::CorrelationConstraint(c.to_f64_lossy()));
    }
    if pt.p1r + pt.p1d > p.p1 * (T::one() + lit(1e-12)) {
        return Err(BoundError::PowerBudget);
    }
    Ok(())
}

/// State-description rate at a fixed parameter point.
///
/// Returns [`BoundError::FeasibilityViolation`] when the point violates the
/// scheme's side conditions. With `Q = 0` the state correlation is ignored.
pub fn lb_state_description_at<T: Real>(
    p: &GaussianRelayParams<T>,
    pt: &StateDescParamPoint<T>,
) -> Result<BoundResult<T>, BoundError> {
    p.validate()?;
    check_state_point(p, pt)?;
    let s = StateShape::new(p, pt.p1r, pt.p1d, pt.theta, pt.rho12, pt.rho1s);
    let relay = s.relay(pt.alpha);
    let dest_dpc = s.dest_dpc(pt.alpha);
    if !s.feasible(pt.alpha) {
        return Err(BoundError::FeasibilityViolation {
            relay: relay.to_f64_lossy(),
            destination: (dest_dpc + s.direct).to_f64_lossy(),
        });
    }
    let mac = dest_dpc + s.coop;
    let rate = relay.min(mac) + s.direct;
    let rho1s = if p.q > T::zero() { pt.rho1s } else { T::zero() };
    Ok(BoundResult::new(
        rate,
        ActiveTerm::of(relay, mac),
        &[
            ("P1r", pt.p1r),
            ("P1d", pt.p1d),
            ("theta", pt.theta),
            ("rho12", pt.rho12),
            ("rho1s", rho1s),
            ("alpha", pt.alpha),
        ],
        &[
            ("D", s.d),
            ("xi", s.xi),
            ("alpha2", s.alpha2),
            ("Q_tilde", s.q_tilde),
            ("P_prime", s.p_prime),
            ("relay", relay),
            ("mac_dpc", dest_dpc),
            ("mac_coop", s.coop),
            ("mac", mac),
            ("direct", s.direct),
        ],
    ))
}

/// Outer coordinates: total power fraction, split toward the relay, square
/// root of theta, correlation radius and angle on the quarter disc. The square
/// root concentrates grid points at small theta, where the rate varies fastest.
fn state_point_of<T: Real>(p: &GaussianRelayParams<T>, x: &[T]) -> (T, T, T, T, T) {
    let total = x[0] * p.p1;
    let p1r = total * x[1];
    let p1d = total - p1r;
    let (r, phi) = (x[3], x[4]);
    (
        p1r,
        p1d.max(T::zero()),
        x[2] * x[2],
        (r * phi.cos()).max(T::zero()),
        (-r * phi.sin()).min(T::zero()),
    )
}

const STATE_STARTS: usize = 4;
const STATE_REFINE_STEPS: usize = 5;
const STATE_ROUNDS: usize = 12;
const STATE_SHRINK: f64 = 0.5;

fn state_search<T: Real>(
    p: &GaussianRelayParams<T>,
    theta: Option<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    p.validate()?;
    let (t_lo, t_hi) = theta.map_or((T::zero(), T::one()), |t| (t.sqrt(), t.sqrt()));
    let phi_hi: T = if p.q > T::zero() {
        lit(FRAC_PI_2)
    } else {
        T::zero()
    };
    let sb = SearchBox::new(vec![
        Dim::new("power", T::zero(), T::one()),
        Dim::new("split", T::zero(), T::one()),
        Dim::new("sqrt_theta", t_lo, t_hi),
        Dim::new("radius", T::zero(), T::one()),
        Dim::new("angle", T::zero(), phi_hi),
    ])
    .with_multistart(STATE_STARTS, STATE_REFINE_STEPS)
    .with_rounds(STATE_ROUNDS)
    .with_shrink(lit(STATE_SHRINK))
    .configured(cfg);
    let eval = |x: &[T]| -> Option<T> {
        let (p1r, p1d, th, r12, r1s) = state_point_of(p, x);
        let s = StateShape::new(p, p1r, p1d, th, r12, r1s);
        s.best_alpha().map(|a| s.objective(a) + s.direct)
    };
    let best = maximize(eval, &sb)?;
    let (p1r, p1d, th, r12, r1s) = state_point_of(p, &best.argmax);
    let s = StateShape::new(p, p1r, p1d, th, r12, r1s);
    let alpha = s.best_alpha().ok_or(OptimizeError::NoFeasiblePoint)?;
    lb_state_description_at(
        p,
        &StateDescParamPoint {
            p1r,
            p1d,
            theta: th,
            rho12: r12,
            rho1s: r1s,
            alpha,
        },
    )
}

/// State-description rate maximized over power split, theta, correlations and
/// the dirty-paper factor. The search covers the full box and, separately, the
/// `theta = 0` face, and keeps the better result.
pub fn lb_state_description<T: Real>(
    p: &GaussianRelayParams<T>,
) -> Result<BoundResult<T>, BoundError> {
    lb_state_description_with(p, &GridConfig::default())
}

pub fn lb_state_description_with<T: Real>(
    p: &GaussianRelayParams<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    let full = state_search(p, None, cfg)?;
    let face = state_search(p, Some(T::zero()), cfg)?;
    Ok(if face.rate > full.rate { face } else { full })
}

/// State-description rate with no state description sent to the relay
/// (`theta = 0`).
pub fn lb_state_description_no_description<T: Real>(
    p: &GaussianRelayParams<T>,
) -> Result<BoundResult<T>, BoundError> {
    lb_state_description_no_description_with(p, &GridConfig::default())
}

pub fn lb_state_description_no_description_with<T: Real>(
    p: &GaussianRelayParams<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    state_search(p, Some(T::zero()), cfg)
}

// ---------------------------------------------------------------------------
// Hyper-source model

fn check_rhos<T: Real>(rho12: T, rho1s: T) -> Result<(), BoundError> {
    check_unit("rho12", rho12, 0.0, 1.0)?;
    check_unit("rho1s", rho1s, -1.0, 0.0)?;
    let c = sq(rho12) + sq(rho1s);
    if c > T::one() + lit(1e-12) {
        return Err(BoundError::CorrelationConstraint(c.to_f64_lossy()));
    }
    Ok(())
}

/// Terms `(relay, mac, private)` of the hyper-source expressions with the
/// given relay-link noise.
fn hyper_terms<T: Real>(h: &HyperSourceParams<T>, relay_noise: T, rho12: T, rho1s: T) -> (T, T, T) {
    let zeta = (T::one() - sq(rho12) - sq(rho1s)).max(T::zero());
    let private = awgn(h.p1d * zeta / h.n3);
    let relay = awgn(ratio(h.p1r, relay_noise));
    let num = sq(h.p2.sqrt() + rho12 * h.p1d.sqrt());
    let den = h.p1d * zeta + sq(h.q.sqrt() + rho1s * h.p1d.sqrt()) + h.n3;
    (relay, awgn(num / den), private)
}

fn hyper_at<T: Real>(
    h: &HyperSourceParams<T>,
    relay_noise: T,
    rho12: T,
    rho1s: T,
) -> Result<BoundResult<T>, BoundError> {
    h.validate()?;
    check_rhos(rho12, rho1s)?;
    let (relay, mac, private) = hyper_terms(h, relay_noise, rho12, rho1s);
    let (t1, t2) = (relay + private, mac + private);
    Ok(BoundResult::new(
        t1.min(t2),
        ActiveTerm::of(t1, t2),
        &[("rho12", rho12), ("rho1s", rho1s)],
        &[
            ("relay", relay),
            ("mac", mac),
            ("private", private),
            ("term_relay", t1),
            ("term_mac", t2),
        ],
    ))
}

fn hyper_search<T: Real>(
    h: &HyperSourceParams<T>,
    relay_noise: T,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    h.validate()?;
    // The relay term is constant and the private term depends only on the
    // radius, so the disc search splits into a radius search over the best
    // angle for the MAC term.
    let line = |name: &str, upper: T| {
        SearchBox::new(vec![Dim::new(name, T::zero(), upper)])
            .with_steps(21)
            .with_rounds(6)
            .configured(cfg)
    };
    let radius_box = line("radius", T::one());
    let angle_box = line("angle", lit(FRAC_PI_2));
    let to_rho = |r: T, t: T| ((r * t.cos()).max(T::zero()), (-r * t.sin()).min(T::zero()));
    let best_angle = |r: T| {
        maximize(
            |x: &[T]| {
                let (a, b) = to_rho(r, x[0]);
                Some(hyper_terms(h, relay_noise, a, b).1)
            },
            &angle_box,
        )
    };
    let best = maximize(
        |x: &[T]| {
            let angle = best_angle(x[0]).ok()?;
            let (relay, _, private) = hyper_terms(h, relay_noise, x[0], T::zero());
            Some(private + relay.min(angle.value))
        },
        &radius_box,
    )?;
    let angle = best_angle(best.argmax[0])?;
    let (a, b) = to_rho(best.argmax[0], angle.argmax[0]);
    hyper_at(h, relay_noise, a, b)
}

/// Hyper-source upper bound at fixed correlations.
pub fn ub_hyper_at<T: Real>(
    h: &HyperSourceParams<T>,
    rho12: T,
    rho1s: T,
) -> Result<BoundResult<T>, BoundError> {
    hyper_at(h, h.n2, rho12, rho1s)
}

/// Hyper-source upper bound maximized over the quarter disc of correlations.
pub fn ub_hyper<T: Real>(h: &HyperSourceParams<T>) -> Result<BoundResult<T>, BoundError> {
    ub_hyper_with(h, &GridConfig::default())
}

pub fn ub_hyper_with<T: Real>(
    h: &HyperSourceParams<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    hyper_search(h, h.n2, cfg)
}

/// Hyper-source lower bound at fixed correlations: the relay link sees the
/// state as noise.
pub fn lb_hyper_at<T: Real>(
    h: &HyperSourceParams<T>,
    rho12: T,
    rho1s: T,
) -> Result<BoundResult<T>, BoundError> {
    hyper_at(h, h.n2 + h.q, rho12, rho1s)
}

/// Hyper-source lower bound maximized over the quarter disc.
pub fn lb_hyper<T: Real>(h: &HyperSourceParams<T>) -> Result<BoundResult<T>, BoundError> {
    lb_hyper_with(h, &GridConfig::default())
}

pub fn lb_hyper_with<T: Real>(
    h: &HyperSourceParams<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    hyper_search(h, h.n2 + h.q, cfg)
}

/// Lower bound for the model where the state affects only the destination
/// link; the relay link noise is `N2` alone.
pub fn lb_hyper_dest_only<T: Real>(h: &HyperSourceParams<T>) -> Result<BoundResult<T>, BoundError> {
    lb_hyper_dest_only_with(h, &GridConfig::default())
}

pub fn lb_hyper_dest_only_with<T: Real>(
    h: &HyperSourceParams<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    hyper_search(h, h.n2, cfg)
}

/// Capacity of the model where the state affects only the destination link.
pub fn capacity_dest_only<T: Real>(h: &HyperSourceParams<T>) -> Result<BoundResult<T>, BoundError> {
    capacity_dest_only_with(h, &GridConfig::default())
}

pub fn capacity_dest_only_with<T: Real>(
    h: &HyperSourceParams<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    hyper_search(h, h.n2, cfg)
}

// ---------------------------------------------------------------------------
// Orthogonal components, cut-set and the state-as-noise baseline

/// Rate of the orthogonal-component model at a fixed power fraction `gamma`.
pub fn capacity_orthogonal_at<T: Real>(
    p: &GaussianRelayParams<T>,
    gamma: T,
) -> Result<BoundResult<T>, BoundError> {
    p.validate()?;
    check_unit("gamma", gamma, 0.0, 1.0)?;
    let relay = awgn(ratio(gamma * p.p1, p.n2));
    let mac = awgn(p.p2 / p.n3);
    let direct = awgn((T::one() - gamma) * p.p1 / p.n3);
    Ok(BoundResult::new(
        relay.min(mac) + direct,
        ActiveTerm::of(relay, mac),
        &[("gamma", gamma)],
        &[("relay", relay), ("mac", mac), ("direct", direct)],
    ))
}

/// Capacity of the orthogonal-component model.
pub fn capacity_orthogonal<T: Real>(
    p: &GaussianRelayParams<T>,
) -> Result<BoundResult<T>, BoundError> {
    capacity_orthogonal_with(p, &GridConfig::default())
}

pub fn capacity_orthogonal_with<T: Real>(
    p: &GaussianRelayParams<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    p.validate()?;
    let sb = dense_1d("gamma", 0.0, 1.0, cfg);
    let best = maximize(
        |x: &[T]| capacity_orthogonal_at(p, x[0]).ok().map(|r| r.rate),
        &sb,
    )?;
    capacity_orthogonal_at(p, best.argmax[0])
}

fn df_terms<T: Real>(
    p: &GaussianRelayParams<T>,
    rho: T,
    relay_snr_scale: T,
    mac_noise: T,
) -> (T, T) {
    let relay = awgn((T::one() - sq(rho)) * p.p1 * relay_snr_scale);
    let mac = awgn((p.p1 + p.p2 + lit::<T>(2.0) * rho * (p.p1 * p.p2).sqrt()) / mac_noise);
    (relay, mac)
}

fn cutset_terms<T: Real>(p: &GaussianRelayParams<T>, rho: T) -> (T, T) {
    let scale = ratio(T::one(), p.n2) + T::one() / p.n3;
    df_terms(p, rho, scale, p.n3)
}

fn baseline_terms<T: Real>(p: &GaussianRelayParams<T>, rho: T) -> (T, T) {
    df_terms(p, rho, ratio(T::one(), p.n2 + p.q), p.n3 + p.q)
}

fn rho_result<T: Real>(rho: T, (relay, mac): (T, T)) -> BoundResult<T> {
    BoundResult::new(
        relay.min(mac),
        ActiveTerm::of(relay, mac),
        &[("rho", rho)],
        &[("relay", relay), ("mac", mac)],
    )
}

/// Cut-set bound at a fixed source/relay input correlation `rho`.
pub fn cutset_gaussian_at<T: Real>(
    p: &GaussianRelayParams<T>,
    rho: T,
) -> Result<BoundResult<T>, BoundError> {
    p.validate()?;
    check_unit("rho", rho, 0.0, 1.0)?;
    Ok(rho_result(rho, cutset_terms(p, rho)))
}

/// Cut-set upper bound with the state known at both transmitters.
pub fn cutset_gaussian<T: Real>(p: &GaussianRelayParams<T>) -> Result<BoundResult<T>, BoundError> {
    cutset_gaussian_with(p, &GridConfig::default())
}

pub fn cutset_gaussian_with<T: Real>(
    p: &GaussianRelayParams<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    p.validate()?;
    let sb = dense_1d("rho", 0.0, 1.0, cfg);
    let best = maximize(
        |x: &[T]| {
            let (a, b) = cutset_terms(p, x[0]);
            Some(a.min(b))
        },
        &sb,
    )?;
    cutset_gaussian_at(p, best.argmax[0])
}

/// Decode-and-forward rate with the state treated as noise, at fixed `rho`.
pub fn baseline_df_at<T: Real>(
    p: &GaussianRelayParams<T>,
    rho: T,
) -> Result<BoundResult<T>, BoundError> {
    p.validate()?;
    check_unit("rho", rho, 0.0, 1.0)?;
    Ok(rho_result(rho, baseline_terms(p, rho)))
}

/// Decode-and-forward rate with the state treated as unknown noise.
pub fn baseline_df_state_as_noise<T: Real>(
    p: &GaussianRelayParams<T>,
) -> Result<BoundResult<T>, BoundError> {
    baseline_df_state_as_noise_with(p, &GridConfig::default())
}

pub fn baseline_df_state_as_noise_with<T: Real>(
    p: &GaussianRelayParams<T>,
    cfg: &GridConfig,
) -> Result<BoundResult<T>, BoundError> {
    p.validate()?;
    let sb = dense_1d("rho", 0.0, 1.0, cfg);
    let best = maximize(
        |x: &[T]| {
            let (a, b) = baseline_terms(p, x[0]);
            Some(a.min(b))
        },
        &sb,
    )?;
    baseline_df_at(p, best.argmax[0])
}

// ---------------------------------------------------------------------------
// Limits

/// Limiting regimes with closed-form rates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtremeCase {
    /// Relay noise vanishes.
    RelayNoiseZero,
    /// State variance grows without bound.
    StateInfinite,
    /// Relay noise grows without bound.
    RelayLinkBroken,
}

/// Bound families of the general model whose limits are known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    InputDescription,
    StateDescription,
    CutSet,
}

/// Limit of a general-model bound in an extreme regime, if one is known.
pub fn extreme_case_general<T: Real>(
    p: &GaussianRelayParams<T>,
    case: ExtremeCase,
    scheme: Scheme,
) -> Option<T> {
    use ExtremeCase::*;
    use Scheme::*;
    match (case, scheme) {
        (RelayNoiseZero, InputDescription | CutSet) => {
            Some(awgn(sq(p.p1.sqrt() + p.p2.sqrt()) / p.n3))
        }
        (StateInfinite, StateDescription) => Some(awgn(p.p1 / p.n2.max(p.n3))),
        (RelayLinkBroken, InputDescription) => Some(awgn(p.p1 / (p.n3 + p.p2))),
        (RelayLinkBroken, StateDescription | CutSet) => Some(awgn(p.p1 / p.n3)),
        _ => None,
    }
}

/// Limit of the hyper-source bounds in an extreme regime, if one is known.
pub fn extreme_case_hyper<T: Real>(h: &HyperSourceParams<T>, case: ExtremeCase) -> Option<T> {
    match case {
        ExtremeCase::StateInfinite | ExtremeCase::RelayLinkBroken => Some(awgn(h.p1d / h.n3)),
        ExtremeCase::RelayNoiseZero => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(p1: f64, p2: f64, n2: f64, n3: f64, q: f64) -> GaussianRelayParams<f64> {
        GaussianRelayParams::new(p1, p2, n2, n3, q).unwrap()
    }

    #[test]
    fn dpc_rate_examples() {
        assert!((dpc_rate(0.3_f64, 1.0, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(
            (dpc_rate(10.0_f64 / 11.0, 10.0, 15.0, 1.0).unwrap() - 0.5 * 11f64.log2()).abs()
                < 1e-12
        );
        assert!((dpc_rate(0.0_f64, 1.0, 1.0, 1.0).unwrap() - 0.5 * 1.5f64.log2()).abs() < 1e-12);
        assert_eq!(dpc_rate(0.5_f64, 0.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            dpc_rate(0.5_f64, 1.0, 1.0, 0.0),
            Err(BoundError::NonPositiveNoise(_))
        ));
    }

    #[test]
    fn residual_variance_examples() {
        assert_eq!(residual_state_variance(0.0, 3.0, 1.0), 3.0);
        assert_eq!(residual_state_variance(1.0, 3.0, 1.0), 1.0);
        assert_eq!(residual_state_variance(2.0, 3.0, 1.0), 3.0);
    }

    #[test]
    fn input_description_points() {
        let p = gp(1.0, 1.0, 1.0, 1.0, 1.0);
        let r = lb_input_description_at(&p, 0.0).unwrap();
        assert_eq!(r.detail("D"), Some(1.0));
        assert!((r.rate - 0.5 * 1.5f64.log2()).abs() < 1e-12);
        let r = lb_input_description_at(&p, 1.0).unwrap();
        assert!((r.detail("D").unwrap() - 0.5).abs() < 1e-15);
        assert!((r.rate - 0.5 * 1.2f64.log2()).abs() < 1e-12);
        let p0 = gp(1.0, 2.0, 0.0, 1.0, 1.0);
        let r = lb_input_description_at(&p0, 0.0).unwrap();
        let want = 0.5 * (1.0 + (1.0 + 2f64.sqrt()).powi(2)).log2();
        assert!((r.rate - want).abs() < 1e-12);
        assert!(lb_input_description_at(&p, 1.5).is_err());
    }

    #[test]
    fn state_description_zero_information_power() {
        let p = gp(10.0, 10.0, 1.0, 10.0, 30.0);
        let pt = StateDescParamPoint {
            p1r: 10.0,
            p1d: 0.0,
            theta: 1.0,
            rho12: 0.0,
            rho1s: 0.0,
            alpha: 0.4,
        };
        let r = lb_state_description_at(&p, &pt).unwrap();
        assert_eq!(r.rate, 0.0);
        assert_eq!(r.detail("relay"), Some(0.0));
    }

    #[test]
    fn hyper_unit_example() {
        let h = HyperSourceParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let r = ub_hyper_at(&h, 0.0, 0.0).unwrap();
        assert!((r.rate - (0.5 * (4.0f64 / 3.0).log2() + 0.5)).abs() < 1e-12);
        assert_eq!(r.active_term, ActiveTerm::MacCut);
        let r = ub_hyper_at(&h, 1.0, 0.0).unwrap();
        assert!((r.detail("term_relay").unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            ub_hyper_at(&h, 0.8, -0.8),
            Err(BoundError::CorrelationConstraint(_))
        ));
    }

    #[test]
    fn orthogonal_examples() {
        let r = capacity_orthogonal_at(&gp(1.0, 1.0, 1.0, 1.0, 0.0), 1.0).unwrap();
        assert!((r.rate - 0.5).abs() < 1e-12);
        let p = gp(3.0, 0.0, 1.0, 2.0, 0.0);
        let r = capacity_orthogonal(&p).unwrap();
        assert!((r.rate - 0.5 * (1.0f64 + 1.5).log2()).abs() < 1e-12);
    }

    #[test]
    fn cutset_without_relay_power() {
        let p = gp(2.0, 0.0, 1.0, 1.0, 1.0);
        let r = cutset_gaussian(&p).unwrap();
        assert!((r.rate - 0.5 * 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn extreme_limits() {
        let p = gp(1.0, 1.0, 1.0, 1.0, 1.0);
        let v = extreme_case_general(&p, ExtremeCase::RelayNoiseZero, Scheme::CutSet).unwrap();
        assert!((v - 0.5 * 5f64.log2()).abs() < 1e-12);
        let v = extreme_case_general(&p, ExtremeCase::RelayLinkBroken, Scheme::InputDescription)
            .unwrap();
        assert!((v - 0.5 * 1.5f64.log2()).abs() < 1e-12);
        assert_eq!(
            extreme_case_general(&p, ExtremeCase::StateInfinite, Scheme::InputDescription),
            None
        );
    }
}
