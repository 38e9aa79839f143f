//! Verification suite: Gaussian closed forms against the covariance oracle
//! on random parameter points, and discrete evaluators against the
//! summation oracle on random joints.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use relaycap::dm::reference::reference_value;
use relaycap::dm::sample::random_instance;
use relaycap::dm::{
    search_dm, AuxSizes, ChannelSizes, DmChannel, DmError, DmEvaluator, JointLayout, SourceAlphabet,
};
use relaycap::gauss_bounds::{
    BoundError, GaussianRelayParams, HyperSourceParams, StateDescParamPoint,
};
use relaycap::oracle::{self, ConstructionReport, OracleError};

/// Suite settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    pub tol: f64,
    pub seed: u64,
    /// Random parameter points per Gaussian construction.
    pub points: usize,
    /// Random joints per discrete evaluator.
    pub joints: usize,
    /// Whether to run the search-versus-grid check.
    pub search: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            seed: 0,
            points: 50,
            joints: 20,
            search: true,
        }
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub id: String,
    pub point: usize,
    pub max_diff: f64,
    pub pass: bool,
    pub note: String,
}

impl CheckLine {
    pub fn render(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{:<32} point={:03} max_diff={:.3e} {verdict}",
            self.id, self.point, self.max_diff
        );
        if !self.note.is_empty() {
            let _ = write!(s, " ({})", self.note);
        }
        s
    }
}

/// Every check of a suite run, in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub lines: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.lines.iter().filter(|l| !l.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(&l.render());
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "checks={} passed={} failed={}",
            self.lines.len(),
            self.lines.len() - self.failures(),
            self.failures()
        );
        out
    }
}

/// The Gaussian constructions checked by the suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    InputDescription,
    StateDescription,
    HyperConverse,
    HyperAchievability,
    CutsetAndBaseline,
}

impl Construction {
    pub const ALL: [Construction; 5] = [
        Construction::InputDescription,
        Construction::StateDescription,
        Construction::HyperConverse,
        Construction::HyperAchievability,
        Construction::CutsetAndBaseline,
    ];
}

/// A random parameter point for one construction.
#[derive(Clone, Debug, PartialEq)]
pub enum OraclePoint {
    InputDescription(GaussianRelayParams<f64>, f64),
    StateDescription(GaussianRelayParams<f64>, StateDescParamPoint<f64>),
    HyperConverse(HyperSourceParams<f64>, f64, f64),
    HyperAchievability(HyperSourceParams<f64>, f64, f64),
    CutsetAndBaseline(GaussianRelayParams<f64>, f64),
}

impl OraclePoint {
    pub fn id(&self) -> &'static str {
        match self {
            OraclePoint::InputDescription(..) => "input_description",
            OraclePoint::StateDescription(..) => "state_description",
            OraclePoint::HyperConverse(..) => "hyper_converse",
            OraclePoint::HyperAchievability(..) => "hyper_achievability",
            OraclePoint::CutsetAndBaseline(..) => "cutset_and_baseline",
        }
    }

    pub fn check(&self, tol: f64) -> Result<ConstructionReport<f64>, OracleError> {
        match self {
            OraclePoint::InputDescription(p, g) => oracle::verify_input_description(p, *g, tol),
            OraclePoint::StateDescription(p, pt) => oracle::verify_state_description(p, pt, tol),
            OraclePoint::HyperConverse(h, a, b) => oracle::verify_hyper_converse(h, *a, *b, tol),
            OraclePoint::HyperAchievability(h, a, b) => {
                oracle::verify_hyper_achievability(h, *a, *b, tol)
            }
            OraclePoint::CutsetAndBaseline(p, r) => oracle::verify_cutset_and_baseline(p, *r, tol),
        }
    }
}

fn general<R: Rng>(rng: &mut R) -> GaussianRelayParams<f64> {
    GaussianRelayParams {
        p1: rng.gen_range(0.5..20.0),
        p2: rng.gen_range(0.5..20.0),
        n2: rng.gen_range(0.1..10.0),
        n3: rng.gen_range(0.5..10.0),
        q: rng.gen_range(0.5..30.0),
    }
}

fn hyper<R: Rng>(rng: &mut R) -> HyperSourceParams<f64> {
    HyperSourceParams {
        p1r: rng.gen_range(0.5..20.0),
        p1d: rng.gen_range(0.5..20.0),
        p2: rng.gen_range(0.5..20.0),
        n2: rng.gen_range(0.1..10.0),
        n3: rng.gen_range(0.5..10.0),
        q: rng.gen_range(0.5..30.0),
    }
}

/// Correlations drawn uniformly in polar form on the admissible quarter disc.
fn correlations<R: Rng>(rng: &mut R) -> (f64, f64) {
    let r: f64 = rng.gen_range(0.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
    (r * phi.cos(), -r * phi.sin())
}

fn state_point<R: Rng>(rng: &mut R, p: &GaussianRelayParams<f64>) -> StateDescParamPoint<f64> {
    let (rho12, rho1s) = correlations(rng);
    let total = p.p1 * rng.gen_range(0.0..1.0);
    let split: f64 = rng.gen_range(0.0..1.0);
    StateDescParamPoint {
        p1r: total * split,
        p1d: total * (1.0 - split),
        theta: rng.gen_range(0.0..1.0),
        rho12,
        rho1s,
        alpha: rng.gen_range(-0.5..1.5),
    }
}

/// Draw attempts per state-description point before giving up.
const FEASIBLE_ATTEMPTS: usize = 10_000;

/// `count` random points for `c`. State-description points are redrawn
/// until the scheme's side conditions hold.
pub fn oracle_points(c: Construction, count: usize, seed: u64) -> Vec<OraclePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(c as u64);
    (0..count)
        .map(|_| match c {
            Construction::InputDescription => {
                let p = general(&mut rng);
                OraclePoint::InputDescription(p, rng.gen_range(0.01..1.0))
            }
            Construction::StateDescription => {
                let mut last = None;
                for _ in 0..FEASIBLE_ATTEMPTS {
                    let p = general(&mut rng);
                    let pt = state_point(&mut rng, &p);
                    let candidate = OraclePoint::StateDescription(p, pt);
                    let infeasible = matches!(
                        candidate.check(f64::INFINITY),
                        Err(OracleError::Bound(BoundError::FeasibilityViolation { .. }))
                    );
                    last = Some(candidate);
                    if !infeasible {
                        break;
                    }
                }
                last.expect("at least one attempt")
            }
            Construction::HyperConverse => {
                let h = hyper(&mut rng);
                let (a, b) = correlations(&mut rng);
                OraclePoint::HyperConverse(h, a, b)
            }
            Construction::HyperAchievability => {
                let h = hyper(&mut rng);
                let (a, b) = correlations(&mut rng);
                OraclePoint::HyperAchievability(h, a, b)
            }
            Construction::CutsetAndBaseline => {
                let p = general(&mut rng);
                OraclePoint::CutsetAndBaseline(p, rng.gen_range(0.0..1.0))
            }
        })
        .collect()
}

fn oracle_line(point: usize, p: &OraclePoint, tol: f64) -> CheckLine {
    match p.check(tol) {
        Ok(rep) => {
            let mut note = Vec::new();
            if !rep.perturbations_ok() {
                note.push("perturbation increased a rate".to_string());
            }
            if !rep.skipped.is_empty() {
                note.push(format!("skipped: {}", rep.skipped.join("; ")));
            }
            CheckLine {
                id: rep.id.clone(),
                point,
                max_diff: rep.max_diff(),
                pass: rep.ok(),
                note: note.join(", "),
            }
        }
        Err(e) => CheckLine {
            id: p.id().to_string(),
            point,
            max_diff: f64::INFINITY,
            pass: false,
            note: e.to_string(),
        },
    }
}

/// One discrete evaluator against the summation oracle on a random joint.
pub fn dm_oracle_line(evaluator: DmEvaluator, point: usize, seed: u64, tol: f64) -> CheckLine {
    let id = format!("dm.{}", evaluator.name());
    let outcome = (|| -> Result<(Option<f64>, Option<f64>), DmError> {
        let (_, joint) = random_instance::<f64>(evaluator, seed)?;
        Ok((
            evaluator.evaluate(&joint)?.value(),
            reference_value(evaluator, &joint)?,
        ))
    })();
    match outcome {
        Ok((Some(a), Some(b))) => {
            let d = (a - b).abs();
            CheckLine {
                id,
                point,
                max_diff: d,
                pass: d <= tol,
                note: String::new(),
            }
        }
        Ok((None, None)) => CheckLine {
            id,
            point,
            max_diff: 0.0,
            pass: true,
            note: "both infeasible".into(),
        },
        Ok(_) => CheckLine {
            id,
            point,
            max_diff: f64::INFINITY,
            pass: false,
            note: "feasibility disagrees".into(),
        },
        Err(e) => CheckLine {
            id,
            point,
            max_diff: f64::INFINITY,
            pass: false,
            note: e.to_string(),
        },
    }
}

/// Agreement required between the randomized search and the grid optimum.
pub const SEARCH_TOLERANCE: f64 = 1e-3;

/// Search and grid optima of the hyper-source upper bound on a binary
/// instance with a BSC(0.1) relay link and a BSC(0.2) link from the relay
/// input to the destination.
pub fn search_versus_grid(restarts: usize, seed: u64) -> Result<(f64, f64), DmError> {
    let sizes = ChannelSizes {
        state: 1,
        source: SourceAlphabet::Split { relay: 2, dest: 2 },
        relay_input: 2,
        relay_output: 2,
        dest_output: 2,
    };
    let bsc = |p: f64, a: usize, b: usize| if a == b { 1.0 - p } else { p };
    let channel = DmChannel::from_hyper_links(
        sizes,
        vec![1.0],
        |_, a, y| bsc(0.1, a, y),
        |_, _, x2, y| bsc(0.2, x2, y),
    )?;
    let found = search_dm(
        &channel,
        DmEvaluator::UbHyper,
        &AuxSizes::new(),
        restarts,
        seed,
    )?;
    let layout = JointLayout::new(&channel, DmEvaluator::UbHyper.template(), &AuxSizes::new())?;
    let grid: Vec<f64> = (0..=50).map(|k| k as f64 * 0.02).collect();
    let mut best = f64::NEG_INFINITY;
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                // The destination link ignores X1D, so its conditional is left uniform.
                let free = vec![vec![a, 1.0 - a], vec![b, 1.0 - b, c, 1.0 - c], vec![0.5; 4]];
                let j = layout.assemble(&free)?;
                if let Some(v) = DmEvaluator::UbHyper.evaluate(&j)?.value() {
                    best = best.max(v);
                }
            }
        }
    }
    Ok((found.bound.rate, best))
}

/// Runs the whole suite.
pub fn run_verify(cfg: &VerifyConfig) -> VerifyReport {
    let mut lines: Vec<CheckLine> = Construction::ALL
        .iter()
        .flat_map(|&c| {
            oracle_points(c, cfg.points, cfg.seed)
                .into_iter()
                .enumerate()
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(k, p)| oracle_line(*k, p, cfg.tol))
        .collect();
    let dm_jobs: Vec<(DmEvaluator, usize)> = DmEvaluator::ALL
        .iter()
        .flat_map(|&e| (0..cfg.joints).map(move |k| (e, k)))
        .collect();
    lines.extend(
        dm_jobs
            .par_iter()
            .map(|&(e, k)| {
                let seed = cfg
                    .seed
                    .wrapping_mul(1_000_003)
                    .wrapping_add((e as u64) << 32 | k as u64);
                dm_oracle_line(e, k, seed, cfg.tol)
            })
            .collect::<Vec<_>>(),
    );
    if cfg.search {
        lines.push(match search_versus_grid(200, cfg.seed) {
            Ok((found, grid)) => {
                let d = (found - grid).abs();
                CheckLine {
                    id: "dm.search_vs_grid".into(),
                    point: 0,
                    max_diff: d,
                    pass: d <= SEARCH_TOLERANCE,
                    note: format!("search {found:.6}, grid {grid:.6}"),
                }
            }
            Err(e) => CheckLine {
                id: "dm.search_vs_grid".into(),
                point: 0,
                max_diff: f64::INFINITY,
                pass: false,
                note: e.to_string(),
            },
        });
    }
    VerifyReport { lines }
}
