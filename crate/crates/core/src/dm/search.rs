//! Randomized search over joint measures of a template on small alphabets.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::gauss_bounds::BoundResult;
use crate::scalar::{lit, Real};

use super::{AuxSizes, DmChannel, DmError, DmEvaluator, DmJoint, DmReport, JointLayout};

/// Largest joint support the search accepts.
pub const MAX_SUPPORT: usize = 1_000_000;

/// Search budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DmSearchConfig {
    /// Independent random starts.
    pub restarts: usize,
    /// Base seed; restart `r` uses stream `r` of this seed.
    pub seed: u64,
    /// Local perturbation rounds per restart.
    pub rounds: usize,
    /// Row perturbations tried per round, at most.
    pub moves_per_round: usize,
    /// Initial probability mass moved by a perturbation.
    pub initial_step: f64,
    /// Perturbation size below which a restart stops.
    pub min_step: f64,
}

impl Default for DmSearchConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            seed: 0,
            rounds: 60,
            moves_per_round: 32,
            initial_step: 0.25,
            min_step: 1e-4,
        }
    }
}

/// Best joint found by [`search_dm`].
#[derive(Clone, Debug, PartialEq)]
pub struct DmSearchResult<T> {
    /// Best value, the free conditionals as `argmax`, and the report terms.
    pub bound: BoundResult<T>,
    pub joint: DmJoint<T>,
    pub report: DmReport<T>,
    /// Restarts that reached a feasible joint.
    pub feasible_restarts: usize,
}

/// Maximizes `evaluator` over joints of its template for `channel`, with
/// auxiliary alphabet sizes from `aux` and `restarts` random starts. The
/// joint with every free conditional deterministic is evaluated as well.
pub fn search_dm<T: Real>(
    channel: &DmChannel<T>,
    evaluator: DmEvaluator,
    aux: &AuxSizes,
    restarts: usize,
    seed: u64,
) -> Result<DmSearchResult<T>, DmError> {
    search_dm_with(
        channel,
        evaluator,
        aux,
        &DmSearchConfig {
            restarts,
            seed,
            ..Default::default()
        },
    )
}

struct Candidate<T> {
    value: Option<T>,
    free: Vec<Vec<T>>,
    joint: DmJoint<T>,
    report: DmReport<T>,
}

fn score<T: Real>(c: &Option<T>) -> f64 {
    c.map(|v| v.to_f64_lossy()).unwrap_or(f64::NEG_INFINITY)
}

/// Larger value wins; ties go to the lexicographically smaller pmf.
fn better<T: Real>(a: &Candidate<T>, b: &Candidate<T>) -> bool {
    match score(&a.value).total_cmp(&score(&b.value)) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            let pa = a.joint.probabilities().iter().map(|p| p.to_f64_lossy());
            let pb = b.joint.probabilities().iter().map(|p| p.to_f64_lossy());
            pa.zip(pb).map(|(x, y)| x.total_cmp(&y)).find(|o| o.is_ne()) == Some(Ordering::Less)
        }
    }
}

/// As [`search_dm`] with an explicit budget.
pub fn search_dm_with<T: Real>(
    channel: &DmChannel<T>,
    evaluator: DmEvaluator,
    aux: &AuxSizes,
    cfg: &DmSearchConfig,
) -> Result<DmSearchResult<T>, DmError> {
    let layout = JointLayout::new(channel, evaluator.template(), aux)?;
    let shapes = layout.free_shapes();
    let results: Vec<Candidate<T>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(&layout, evaluator, cfg, r as u64))
        .collect::<Result<_, _>>()?;
    let feasible_restarts = results.iter().filter(|c| c.value.is_some()).count();
    let corner = evaluate(&layout, evaluator, corner_point(&layout))?;
    let best = std::iter::once(corner)
        .chain(results)
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .ok_or(DmError::NoFeasibleJoint)?;
    let value = best.value.ok_or(DmError::NoFeasibleJoint)?;
    let argmax = shapes
        .iter()
        .zip(&best.free)
        .flat_map(|((label, _, cols), table)| {
            table
                .iter()
                .enumerate()
                .map(move |(k, p)| (format!("{label}[{}][{}]", k / cols, k % cols), *p))
        })
        .collect();
    let details = best
        .report
        .terms
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    Ok(DmSearchResult {
        bound: BoundResult {
            rate: value,
            argmax,
            active_term: best.report.active_term,
            details,
        },
        joint: best.joint,
        report: best.report,
        feasible_restarts,
    })
}

/// Every free conditional a point mass on symbol 0, so degenerate optima
/// with constant auxiliaries are always among the candidates.
fn corner_point<T: Real>(layout: &JointLayout<T>) -> Vec<Vec<T>> {
    layout
        .free_shapes()
        .iter()
        .map(|(_, rows, cols)| {
            (0..rows * cols)
                .map(|k| if k % cols == 0 { T::one() } else { T::zero() })
                .collect()
        })
        .collect()
}

fn evaluate<T: Real>(
    layout: &JointLayout<T>,
    evaluator: DmEvaluator,
    free: Vec<Vec<T>>,
) -> Result<Candidate<T>, DmError> {
    let joint = layout.assemble_trusted(&free)?;
    let report = evaluator.evaluate(&joint)?;
    Ok(Candidate {
        value: report.value(),
        free,
        joint,
        report,
    })
}

/// Random start from a flat Dirichlet draw per row, then coordinate moves
/// of probability mass between two symbols of one row, kept when they
/// improve the value.
fn run_restart<T: Real>(
    layout: &JointLayout<T>,
    evaluator: DmEvaluator,
    cfg: &DmSearchConfig,
    restart: u64,
) -> Result<Candidate<T>, DmError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart);
    let shapes = layout.free_shapes();
    let free = layout.sample_free(&mut rng);
    let mut best = evaluate(layout, evaluator, free)?;
    let rows: Vec<(usize, usize)> = shapes
        .iter()
        .enumerate()
        .filter(|(_, (_, _, cols))| *cols > 1)
        .flat_map(|(f, (_, rows, _))| (0..*rows).map(move |r| (f, r)))
        .collect();
    if rows.is_empty() {
        return Ok(best);
    }
    let mut step = cfg.initial_step;
    for _ in 0..cfg.rounds {
        if step < cfg.min_step {
            break;
        }
        let mut improved = false;
        let picks = cfg.moves_per_round.min(rows.len());
        for m in 0..picks {
            let (f, r) = if rows.len() <= cfg.moves_per_round {
                rows[m]
            } else {
                rows[rng.gen_range(0..rows.len())]
            };
            let cols = shapes[f].2;
            let from = rng.gen_range(0..cols);
            let to = (from + rng.gen_range(1..cols)) % cols;
            let base = r * cols;
            let mass = best.free[f][base + from];
            if mass <= T::zero() {
                continue;
            }
            let moved = mass.min(lit::<T>(step));
            let mut free = best.free.clone();
            free[f][base + from] = mass - moved;
            free[f][base + to] = free[f][base + to] + moved;
            let cand = evaluate(layout, evaluator, free)?;
            if score(&cand.value) > score(&best.value) {
                best = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}
