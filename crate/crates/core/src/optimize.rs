//! Deterministic grid-and-refine maximization over low-dimensional boxes.

use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::{lit, Real};

/// Errors raised by [`maximize`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("no feasible point on the coarse grid")]
    NoFeasiblePoint,
    #[error("invalid search box: {0}")]
    InvalidBox(String),
}

/// One named coordinate of a search box.
#[derive(Clone, Debug, PartialEq)]
pub struct Dim<T> {
    pub name: String,
    pub lower: T,
    pub upper: T,
}

impl<T: Real> Dim<T> {
    pub fn new(name: &str, lower: T, upper: T) -> Self {
        Self {
            name: name.to_string(),
            lower,
            upper,
        }
    }
}

type Predicate<T> = Arc<dyn Fn(&[T]) -> bool + Send + Sync>;

/// Overrides for the grid resolution of a search.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GridConfig {
    pub coarse_steps: Option<usize>,
    pub refine_rounds: Option<usize>,
    pub refine_shrink: Option<f64>,
    pub refine_steps: Option<usize>,
    pub refine_starts: Option<usize>,
}

/// A box of candidate points with a feasibility predicate and grid settings.
#[derive(Clone)]
pub struct SearchBox<T> {
    pub dims: Vec<Dim<T>>,
    feasible: Option<Predicate<T>>,
    pub coarse_steps: Vec<usize>,
    pub refine_rounds: usize,
    pub refine_shrink: T,
    /// Grid points per dimension in refinement rounds; defaults to `coarse_steps`.
    pub refine_steps: Option<usize>,
    /// Number of well-separated coarse points refined independently.
    pub refine_starts: usize,
}

impl<T: Real> std::fmt::Debug for SearchBox<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SearchBox")
            .field("dims", &self.dims)
            .field("coarse_steps", &self.coarse_steps)
            .field("refine_rounds", &self.refine_rounds)
            .field("refine_shrink", &self.refine_shrink)
            .field("refine_steps", &self.refine_steps)
            .field("refine_starts", &self.refine_starts)
            .finish()
    }
}

impl<T: Real> SearchBox<T> {
    /// Box with default resolution: 21 steps per dimension up to three
    /// dimensions, 9 beyond, 4 refinement rounds with shrink 0.25.
    pub fn new(dims: Vec<Dim<T>>) -> Self {
        let steps = if dims.len() <= 3 { 21 } else { 9 };
        let n = dims.len();
        Self {
            dims,
            feasible: None,
            coarse_steps: vec![steps; n],
            refine_rounds: 4,
            refine_shrink: lit(0.25),
            refine_steps: None,
            refine_starts: 1,
        }
    }

    pub fn with_feasible(mut self, pred: impl Fn(&[T]) -> bool + Send + Sync + 'static) -> Self {
        self.feasible = Some(Arc::new(pred));
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.coarse_steps = vec![steps; self.dims.len()];
        self
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.refine_rounds = rounds;
        self
    }

    pub fn with_shrink(mut self, shrink: T) -> Self {
        self.refine_shrink = shrink;
        self
    }

    /// Refines around `starts` separated coarse points using `steps` points per
    /// dimension in each refinement grid.
    pub fn with_multistart(mut self, starts: usize, steps: usize) -> Self {
        self.refine_starts = starts.max(1);
        self.refine_steps = Some(steps);
        self
    }

    /// Applies caller overrides on top of the current settings.
    pub fn configured(mut self, cfg: &GridConfig) -> Self {
        if let Some(s) = cfg.coarse_steps {
            self = self.with_steps(s);
        }
        if let Some(r) = cfg.refine_rounds {
            self.refine_rounds = r;
        }
        if let Some(s) = cfg.refine_shrink {
            self.refine_shrink = lit(s);
        }
        if let Some(s) = cfg.refine_steps {
            self.refine_steps = Some(s);
        }
        if let Some(k) = cfg.refine_starts {
            self.refine_starts = k.max(1);
        }
        self
    }

    /// Whether a point satisfies the feasibility predicate.
    pub fn is_feasible(&self, x: &[T]) -> bool {
        self.feasible.as_ref().is_none_or(|p| p(x))
    }

    fn validate(&self) -> Result<(), OptimizeError> {
        if self.coarse_steps.len() != self.dims.len() {
            return Err(OptimizeError::InvalidBox(
                "one step count per dimension required".into(),
            ));
        }
        if self.coarse_steps.iter().any(|&s| s < 2) || self.refine_steps.is_some_and(|s| s < 2) {
            return Err(OptimizeError::InvalidBox(
                "coarse_steps must be at least 2".into(),
            ));
        }
        if !(self.refine_shrink > T::zero() && self.refine_shrink < T::one()) {
            return Err(OptimizeError::InvalidBox(
                "refine_shrink must lie in (0, 1)".into(),
            ));
        }
        for d in &self.dims {
            if !(d.lower <= d.upper) {
                return Err(OptimizeError::InvalidBox(format!(
                    "dimension `{}` has lower > upper",
                    d.name
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of a maximization.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimum<T> {
    pub argmax: Vec<T>,
    pub value: T,
    /// Incumbent value after the coarse scan and after each refinement round.
    pub history: Vec<T>,
}

fn axis<T: Real>(lo: T, hi: T, steps: usize) -> Vec<T> {
    if lo == hi {
        return vec![lo];
    }
    let last = lit::<T>((steps - 1) as f64);
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * lit::<T>(i as f64) / last
            }
        })
        .collect()
}

fn lex_cmp<T: Real>(a: &[T], b: &[T]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

fn better<T: Real>(value: T, point: &[T], best: &Option<(Vec<T>, T)>) -> bool {
    match best {
        None => true,
        Some((bp, bv)) => value > *bv || (value == *bv && lex_cmp(point, bp) == Ordering::Less),
    }
}

fn index_to_point<T: Real>(axes: &[Vec<T>], mut k: usize) -> Vec<T> {
    let mut p = vec![T::zero(); axes.len()];
    for d in (0..axes.len()).rev() {
        let n = axes[d].len();
        p[d] = axes[d][k % n];
        k /= n;
    }
    p
}

/// Evaluates `f` on every grid point, in index order.
fn scan<T: Real, F>(f: &F, sb: &SearchBox<T>, axes: &[Vec<T>]) -> Vec<Option<T>>
where
    F: Fn(&[T]) -> Option<T> + Sync,
{
    let total: usize = axes.iter().map(Vec::len).product();
    (0..total)
        .into_par_iter()
        .with_min_len(64)
        .map(|k| {
            let p = index_to_point(axes, k);
            if sb.is_feasible(&p) {
                f(&p).filter(|v| !v.is_nan())
            } else {
                None
            }
        })
        .collect()
}

fn reduce<T: Real>(axes: &[Vec<T>], values: &[Option<T>], best: &mut Option<(Vec<T>, T)>) {
    for (k, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            let p = index_to_point(axes, k);
            if better(v, &p, best) {
                *best = Some((p, v));
            }
        }
    }
}

/// Up to `count` feasible coarse points in decreasing value order, each at
/// least two grid cells (max norm) away from those already chosen.
fn separated_starts<T: Real>(axes: &[Vec<T>], values: &[Option<T>], count: usize) -> Vec<Vec<T>> {
    let mut order: Vec<(usize, T)> = values
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect();
    order.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| lex_cmp(&index_to_point(axes, a.0), &index_to_point(axes, b.0)))
    });
    let sizes: Vec<usize> = axes.iter().map(Vec::len).collect();
    let digits = |mut k: usize| -> Vec<usize> {
        let mut d = vec![0; sizes.len()];
        for i in (0..sizes.len()).rev() {
            d[i] = k % sizes[i];
            k /= sizes[i];
        }
        d
    };
    let mut chosen: Vec<Vec<usize>> = Vec::new();
    let mut starts = Vec::new();
    for (k, _) in order {
        if starts.len() == count {
            break;
        }
        let dk = digits(k);
        let far = chosen.iter().all(|c| {
            c.iter()
                .zip(&dk)
                .map(|(a, b)| a.abs_diff(*b))
                .max()
                .unwrap_or(0)
                >= 2
        });
        if far {
            chosen.push(dk);
            starts.push(index_to_point(axes, k));
        }
    }
    starts
}

/// Maximizes `f` over the box. `f` returns `None` at infeasible points.
///
/// The coarse grid is scanned in full, then each refinement round re-grids a
/// box shrunk by `refine_shrink` around the incumbent, clipped to the original
/// bounds. With several refinement starts each start keeps its own incumbent;
/// the overall best is tracked across all of them. Ties go to the
/// lexicographically smallest point.
pub fn maximize<T: Real, F>(f: F, sb: &SearchBox<T>) -> Result<Optimum<T>, OptimizeError>
where
    F: Fn(&[T]) -> Option<T> + Sync,
{
    sb.validate()?;
    let axes: Vec<Vec<T>> = sb
        .dims
        .iter()
        .zip(&sb.coarse_steps)
        .map(|(d, &s)| axis(d.lower, d.upper, s))
        .collect();
    let coarse = scan(&f, sb, &axes);
    let mut best = None;
    reduce(&axes, &coarse, &mut best);
    let (_, v0) = best.clone().ok_or(OptimizeError::NoFeasiblePoint)?;
    let starts = if sb.refine_starts > 1 {
        separated_starts(&axes, &coarse, sb.refine_starts)
    } else {
        best.iter().map(|(p, _)| p.clone()).collect()
    };
    let mut local: Vec<Option<(Vec<T>, T)>> = starts
        .into_iter()
        .map(|p| {
            let v = f(&p);
            v.map(|v| (p, v))
        })
        .collect();
    let mut history = vec![v0];
    let mut half: Vec<T> = sb
        .dims
        .iter()
        .map(|d| (d.upper - d.lower) * lit(0.5))
        .collect();
    for _ in 0..sb.refine_rounds {
        for h in half.iter_mut() {
            *h = *h * sb.refine_shrink;
        }
        for inc in local.iter_mut() {
            let center = match inc {
                Some((p, _)) => p.clone(),
                None => continue,
            };
            let axes: Vec<Vec<T>> = sb
                .dims
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let lo = (center[i] - half[i]).max(d.lower);
                    let hi = (center[i] + half[i]).min(d.upper);
                    axis(lo, hi, sb.refine_steps.unwrap_or(sb.coarse_steps[i]))
                })
                .collect();
            let values = scan(&f, sb, &axes);
            reduce(&axes, &values, inc);
            if let Some((p, v)) = inc.as_ref() {
                if better(*v, p, &best) {
                    best = Some((p.clone(), *v));
                }
            }
        }
        history.push(best.as_ref().map(|(_, v)| *v).unwrap_or(v0));
    }
    let (argmax, value) = best.ok_or(OptimizeError::NoFeasiblePoint)?;
    Ok(Optimum {
        argmax,
        value,
        history,
    })
}
