//! Entropy and mutual information of named, zero-mean jointly Gaussian variables.
//!
//! All quantities are in bits. Determinant ratios are evaluated on
//! correlation-normalized submatrices so that degeneracy tests are scale free.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::Mat;
use crate::scalar::{degeneracy_tol, lit, Real};

/// Errors raised by Gaussian information computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussError {
    #[error("covariance matrix is {rows}x{cols} but {names} names were given")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        names: usize,
    },
    #[error("covariance is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("covariance is not positive semidefinite (eigenvalue {0})")]
    NotPsd(f64),
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("unknown variable name `{0}`")]
    UnknownName(String),
    #[error("negative noise variance {0}")]
    NegativeVariance(f64),
    #[error("empty variable set")]
    EmptySet,
    #[error("variable `{0}` appears in more than one argument set")]
    Overlap(String),
    #[error("degenerate entropy: determinant {det:e}")]
    DegenerateEntropy { det: f64 },
    #[error("singular covariance for set {0:?}")]
    Singular(Vec<String>),
    #[error("infinite mutual information: joint covariance is singular")]
    InfiniteInformation,
    #[error("at least 1000 samples are required, got {0}")]
    TooFewSamples(usize),
}

/// Named zero-mean jointly Gaussian variables with their covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSystem<T> {
    names: Vec<String>,
    cov: Mat<T>,
}

impl<T: Real> GaussianSystem<T> {
    /// An empty system.
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            cov: Mat::zeros(0),
        }
    }

    /// Builds a system from names and a row-major covariance.
    ///
    /// Slightly negative eigenvalues (down to `-1e-9` times the largest) are
    /// clamped to zero.
    pub fn from_covariance<S: AsRef<str>>(names: &[S], cov: &[Vec<T>]) -> Result<Self, GaussError> {
        let n = names.len();
        if cov.len() != n || cov.iter().any(|r| r.len() != n) {
            return Err(GaussError::ShapeMismatch {
                rows: cov.len(),
                cols: cov.first().map_or(0, Vec::len),
                names: n,
            });
        }
        let mut owned = Vec::with_capacity(n);
        for name in names {
            let name = name.as_ref().to_string();
            if owned.contains(&name) {
                return Err(GaussError::DuplicateName(name));
            }
            owned.push(name);
        }
        let scale = cov.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()));
        let sym_tol =
            lit::<T>(1e-12).max(T::epsilon() * lit::<T>(8.0)) * scale.max(T::min_positive_value());
        for (i, row) in cov.iter().enumerate() {
            for (j, other) in cov.iter().enumerate().skip(i + 1) {
                if (row[j] - other[i]).abs() > sym_tol {
                    return Err(GaussError::NotSymmetric(i, j));
                }
            }
        }
        let m = Mat::from_fn(n, |i, j| (cov[i][j] + cov[j][i]) * lit::<T>(0.5));
        let (w, v) = m.sym_eigen();
        let wmax = w.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
        let wmin = w.iter().fold(T::infinity(), |a, &x| a.min(x));
        let cov = if n > 0 && wmin < T::zero() {
            if wmin < -lit::<T>(1e-9) * wmax {
                return Err(GaussError::NotPsd(wmin.to_f64_lossy()));
            }
            let wc: Vec<T> = w.iter().map(|&x| x.max(T::zero())).collect();
            Mat::from_fn(n, |i, j| {
                (0..n).fold(T::zero(), |s, k| s + v.get(i, k) * wc[k] * v.get(j, k))
            })
        } else {
            m
        };
        Ok(Self { names: owned, cov })
    }

    /// Variable names in declaration order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Number of variables.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Covariance between two named variables.
    pub fn covariance(&self, a: &str, b: &str) -> Result<T, GaussError> {
        Ok(self.cov.get(self.index(a)?, self.index(b)?))
    }

    /// Variance of a named variable.
    pub fn variance(&self, a: &str) -> Result<T, GaussError> {
        self.covariance(a, a)
    }

    fn index(&self, name: &str) -> Result<usize, GaussError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| GaussError::UnknownName(name.to_string()))
    }

    fn indices(&self, set: &[&str]) -> Result<Vec<usize>, GaussError> {
        set.iter().map(|s| self.index(s)).collect()
    }

    /// Adds an independent variable with the given variance.
    pub fn add_independent(&self, name: &str, var: T) -> Result<Self, GaussError> {
        self.extend_linear(name, &[], var)
    }

    /// Adds `name = sum(coeff * existing) + fresh noise of variance noise_var`.
    pub fn extend_linear(
        &self,
        name: &str,
        coeffs: &[(&str, T)],
        noise_var: T,
    ) -> Result<Self, GaussError> {
        if self.names.iter().any(|n| n == name) {
            return Err(GaussError::DuplicateName(name.to_string()));
        }
        if !(noise_var >= T::zero()) {
            return Err(GaussError::NegativeVariance(noise_var.to_f64_lossy()));
        }
        let n = self.len();
        let mut w = vec![T::zero(); n];
        for &(key, c) in coeffs {
            w[self.index(key)?] = w[self.index(key)?] + c;
        }
        // cov(new, j) = sum_k w_k cov(k, j)
        let cross: Vec<T> = (0..n)
            .map(|j| (0..n).fold(T::zero(), |s, k| s + w[k] * self.cov.get(k, j)))
            .collect();
        let var = (0..n).fold(T::zero(), |s, j| s + w[j] * cross[j]) + noise_var;
        let cov = Mat::from_fn(n + 1, |i, j| match (i == n, j == n) {
            (true, true) => var.max(T::zero()),
            (true, false) => cross[j],
            (false, true) => cross[i],
            (false, false) => self.cov.get(i, j),
        });
        let mut names = self.names.clone();
        names.push(name.to_string());
        Ok(Self { names, cov })
    }

    /// Determinant of a principal sub-covariance.
    pub fn determinant(&self, set: &[&str]) -> Result<T, GaussError> {
        Ok(self.cov.sub(&self.indices(set)?).det())
    }

    /// Determinant of the correlation matrix of `idx`; zero if any variance is zero.
    fn normalized_det(&self, idx: &[usize]) -> T {
        if idx.is_empty() {
            return T::one();
        }
        let d: Vec<T> = idx.iter().map(|&i| self.cov.get(i, i)).collect();
        if d.iter().any(|&x| !(x > T::zero())) {
            return T::zero();
        }
        let s: Vec<T> = d.iter().map(|x| x.sqrt()).collect();
        Mat::from_fn(idx.len(), |i, j| {
            self.cov.get(idx[i], idx[j]) / (s[i] * s[j])
        })
        .det()
    }

    /// Differential entropy `0.5 log2((2 pi e)^k det)` of a variable set.
    pub fn entropy(&self, set: &[&str]) -> Result<T, GaussError> {
        if set.is_empty() {
            return Err(GaussError::EmptySet);
        }
        check_disjoint(&[set])?;
        let idx = self.indices(set)?;
        let det = self.cov.sub(&idx).det();
        if !(det > lit::<T>(1e-300).max(T::min_positive_value()))
            || self.normalized_det(&idx) < degeneracy_tol()
        {
            return Err(GaussError::DegenerateEntropy {
                det: det.to_f64_lossy(),
            });
        }
        let k = lit::<T>(idx.len() as f64);
        let two_pi_e = lit::<T>(2.0) * T::PI() * T::E();
        Ok(lit::<T>(0.5) * (k * two_pi_e.log2() + det.log2()))
    }

    /// `I(A;B)` in bits.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<T, GaussError> {
        self.conditional_mi(a, b, &[])
    }

    /// `I(A;B|C)` in bits. Returns 0 when `A` or `B` is a linear function of `C`.
    pub fn conditional_mi(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<T, GaussError> {
        if a.is_empty() || b.is_empty() {
            return Err(GaussError::EmptySet);
        }
        check_disjoint(&[a, b, c])?;
        let ia = self.indices(a)?;
        let ib = self.indices(b)?;
        let ic = self.indices(c)?;
        // Canonical order makes the value exactly symmetric in A and B.
        let (ia, ib, a, b) = if ia <= ib {
            (ia, ib, a, b)
        } else {
            (ib, ia, b, a)
        };
        let tol = degeneracy_tol::<T>();
        let join =
            |x: &[usize], y: &[usize]| -> Vec<usize> { x.iter().chain(y).copied().collect() };
        let dc = self.normalized_det(&ic);
        if dc < tol {
            return Err(GaussError::Singular(
                c.iter().map(|s| s.to_string()).collect(),
            ));
        }
        let dac = self.normalized_det(&join(&ia, &ic));
        let dbc = self.normalized_det(&join(&ib, &ic));
        // Residual variance ratios; a block measurable from C carries no information.
        if dac / dc < tol || dbc / dc < tol {
            if c.is_empty() {
                let bad = if dac < tol { a } else { b };
                return Err(GaussError::Singular(
                    bad.iter().map(|s| s.to_string()).collect(),
                ));
            }
            return Ok(T::zero());
        }
        let dabc = self.normalized_det(&join(&join(&ia, &ib), &ic));
        if dabc / dc < tol * (dac / dc) * (dbc / dc) {
            return Err(GaussError::InfiniteInformation);
        }
        let v = lit::<T>(0.5) * ((dac / dc) * (dbc / dc) / (dabc / dc)).log2();
        Ok(v)
    }

    /// Monte Carlo estimate of `I(A;B)` with its standard error, in bits.
    pub fn mc_mi_estimate(
        &self,
        a: &[&str],
        b: &[&str],
        samples: usize,
        seed: u64,
    ) -> Result<(T, T), GaussError> {
        if samples < 1000 {
            return Err(GaussError::TooFewSamples(samples));
        }
        if a.is_empty() || b.is_empty() {
            return Err(GaussError::EmptySet);
        }
        check_disjoint(&[a, b])?;
        let ia = self.indices(a)?;
        let ib = self.indices(b)?;
        let iab: Vec<usize> = ia.iter().chain(&ib).copied().collect();
        let (na, nab) = (ia.len(), iab.len());
        let sab = self.cov.sub(&iab);
        let (w, v) = sab.sym_eigen();
        let wmax = w.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        if w.iter().any(|&x| x < -lit::<T>(1e-9) * wmax) {
            return Err(GaussError::NotPsd(
                w.iter()
                    .fold(T::infinity(), |m, &x| m.min(x))
                    .to_f64_lossy(),
            ));
        }
        let factor = Mat::from_fn(nab, |i, k| v.get(i, k) * w[k].max(T::zero()).sqrt());
        let inv_ab = sab.inverse().ok_or(GaussError::InfiniteInformation)?;
        let ra: Vec<usize> = (0..na).collect();
        let rb: Vec<usize> = (na..nab).collect();
        let inv_a = sab
            .sub(&ra)
            .inverse()
            .ok_or_else(|| GaussError::Singular(a.iter().map(|s| s.to_string()).collect()))?;
        let inv_b = sab
            .sub(&rb)
            .inverse()
            .ok_or_else(|| GaussError::Singular(b.iter().map(|s| s.to_string()).collect()))?;
        let exact = self.mutual_information(a, b)?;
        let quad = |m: &Mat<T>, x: &[T]| -> T {
            let n = x.len();
            (0..n).fold(T::zero(), |s, i| {
                s + x[i] * (0..n).fold(T::zero(), |t, j| t + m.get(i, j) * x[j])
            })
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half_ln2_inv = lit::<T>(0.5) / T::LN_2();
        let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
        let mut z = vec![T::zero(); nab];
        let mut x = vec![T::zero(); nab];
        for _ in 0..samples {
            for zi in z.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *zi = lit(g);
            }
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = (0..nab).fold(T::zero(), |s, k| s + factor.get(i, k) * z[k]);
            }
            let term = exact
                + half_ln2_inv
                    * (quad(&inv_a, &x[..na]) + quad(&inv_b, &x[na..]) - quad(&inv_ab, &x));
            let t = term.to_f64_lossy();
            sum += t;
            sum_sq += t * t;
        }
        let n = samples as f64;
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        Ok((lit(mean), lit((var / n).sqrt())))
    }
}

impl<T: Real> Default for GaussianSystem<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn check_disjoint(sets: &[&[&str]]) -> Result<(), GaussError> {
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for set in sets {
        for name in set.iter() {
            if seen.insert(name, ()).is_some() {
                return Err(GaussError::Overlap(name.to_string()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xz() -> GaussianSystem<f64> {
        GaussianSystem::new()
            .add_independent("X", 1.0)
            .unwrap()
            .add_independent("Z", 1.0)
            .unwrap()
            .extend_linear("Y", &[("X", 1.0), ("Z", 1.0)], 0.0)
            .unwrap()
    }

    #[test]
    fn extend_identity_combination() {
        let s = GaussianSystem::new()
            .add_independent("S", 1.0)
            .unwrap()
            .extend_linear("Y", &[("S", 1.0)], 1.0)
            .unwrap();
        assert_eq!(s.variance("Y").unwrap(), 2.0);
        assert_eq!(s.covariance("Y", "S").unwrap(), 1.0);
    }

    #[test]
    fn quantizer_distortion() {
        let (p, d) = (4.0_f64, 1.5_f64);
        let a = 1.0 - d / p;
        let s = GaussianSystem::new()
            .add_independent("X", p)
            .unwrap()
            .extend_linear("Xh", &[("X", a)], d * (1.0 - d / p))
            .unwrap()
            .extend_linear("E", &[("X", 1.0), ("Xh", -1.0)], 0.0)
            .unwrap();
        assert!((s.variance("Xh").unwrap() - (p - d)).abs() < 1e-12);
        assert!((s.variance("E").unwrap() - d).abs() < 1e-12);
    }

    #[test]
    fn extend_errors() {
        let s = GaussianSystem::<f64>::new()
            .add_independent("X", 1.0)
            .unwrap();
        assert!(matches!(
            s.extend_linear("Y", &[("W", 1.0)], 0.0),
            Err(GaussError::UnknownName(_))
        ));
        assert!(matches!(
            s.extend_linear("X", &[], 0.0),
            Err(GaussError::DuplicateName(_))
        ));
        assert!(matches!(
            s.extend_linear("Y", &[], -1.0),
            Err(GaussError::NegativeVariance(_))
        ));
    }

    #[test]
    fn entropy_values() {
        let s = xz();
        assert!((s.entropy(&["X"]).unwrap() - 2.047095585180641).abs() < 1e-6);
        assert!((s.entropy(&["X", "Z"]).unwrap() - 4.094191170361282).abs() < 1e-6);
        let d = s.extend_linear("X2", &[("X", 1.0)], 0.0).unwrap();
        assert!(matches!(
            d.entropy(&["X", "X2"]),
            Err(GaussError::DegenerateEntropy { .. })
        ));
    }

    #[test]
    fn mutual_information_values() {
        let s = xz();
        assert!((s.mutual_information(&["X"], &["Y"]).unwrap() - 0.5).abs() < 1e-12);
        assert!(s.mutual_information(&["X"], &["Z"]).unwrap().abs() < 1e-12);
        let d = s.extend_linear("Xc", &[("X", 1.0)], 0.0).unwrap();
        assert_eq!(
            d.mutual_information(&["X"], &["Xc"]),
            Err(GaussError::InfiniteInformation)
        );
        assert!(matches!(
            s.mutual_information(&["X"], &["X"]),
            Err(GaussError::Overlap(_))
        ));
    }

    #[test]
    fn conditional_cases() {
        let s = xz().add_independent("W", 3.0).unwrap();
        let direct = s.mutual_information(&["X"], &["Y"]).unwrap();
        let cond = s.conditional_mi(&["X"], &["Y"], &["W"]).unwrap();
        assert!((direct - cond).abs() < 1e-12);
        let c = s.extend_linear("Xc", &[("X", 1.0)], 0.0).unwrap();
        assert_eq!(c.conditional_mi(&["Xc"], &["Y"], &["X"]).unwrap(), 0.0);
        assert!(matches!(
            s.conditional_mi(&["X"], &["Y"], &["X"]),
            Err(GaussError::Overlap(_))
        ));
    }

    #[test]
    fn mc_is_deterministic() {
        let s = xz();
        let a = s.mc_mi_estimate(&["X"], &["Y"], 2000, 7).unwrap();
        let b = s.mc_mi_estimate(&["X"], &["Y"], 2000, 7).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            s.mc_mi_estimate(&["X"], &["Y"], 10, 7),
            Err(GaussError::TooFewSamples(10))
        ));
    }

    #[test]
    fn rejects_indefinite() {
        let r = GaussianSystem::from_covariance(&["A", "B"], &[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(r, Err(GaussError::NotPsd(_))));
        let r = GaussianSystem::from_covariance(&["A", "A"], &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(r, Err(GaussError::DuplicateName(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let s = GaussianSystem::<f32>::new()
            .add_independent("X", 1.0)
            .unwrap()
            .extend_linear("Y", &[("X", 1.0)], 1.0)
            .unwrap();
        assert!((s.mutual_information(&["X"], &["Y"]).unwrap() - 0.5).abs() < 1e-5);
    }
}
