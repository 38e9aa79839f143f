//! Small dense linear algebra on row-major square matrices.

use crate::scalar::{lit, Real};

/// Dense square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Mat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    /// Principal submatrix on the given indices.
    pub fn sub(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    /// Determinant by LU with full pivoting.
    pub fn det(&self) -> T {
        let n = self.n;
        if n == 0 {
            return T::one();
        }
        let mut a = self.data.clone();
        let mut sign = T::one();
        let mut det = T::one();
        for k in 0..n {
            let (mut pi, mut pj, mut best) = (k, k, T::zero());
            for i in k..n {
                for j in k..n {
                    let v = a[i * n + j].abs();
                    if v > best {
                        best = v;
                        pi = i;
                        pj = j;
                    }
                }
            }
            if best == T::zero() {
                return T::zero();
            }
            if pi != k {
                for j in 0..n {
                    a.swap(k * n + j, pi * n + j);
                }
                sign = -sign;
            }
            if pj != k {
                for i in 0..n {
                    a.swap(i * n + k, i * n + pj);
                }
                sign = -sign;
            }
            let piv = a[k * n + k];
            det = det * piv;
            for i in (k + 1)..n {
                let f = a[i * n + k] / piv;
                if f != T::zero() {
                    for j in (k + 1)..n {
                        a[i * n + j] = a[i * n + j] - f * a[k * n + j];
                    }
                }
            }
        }
        sign * det
    }

    /// Symmetric eigen-decomposition by cyclic Jacobi rotations.
    /// Returns eigenvalues and the eigenvector matrix (columns).
    pub fn sym_eigen(&self) -> (Vec<T>, Mat<T>) {
        let n = self.n;
        let mut a = self.clone();
        let mut v = Mat::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() });
        let scale = self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let thresh = scale * T::epsilon() * lit::<T>(0.01);
        for _sweep in 0..100 {
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a.get(i, j).abs());
                }
            }
            if off <= thresh {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= thresh {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (lit::<T>(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
        ((0..n).map(|i| a.get(i, i)).collect(), v)
    }

    /// Inverse by Gauss-Jordan with partial pivoting. `None` if singular.
    pub fn inverse(&self) -> Option<Mat<T>> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Mat::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() });
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| {
                a.get(x, k)
                    .abs()
                    .partial_cmp(&a.get(y, k).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a.get(p, k) == T::zero() {
                return None;
            }
            for j in 0..n {
                let t = a.get(k, j);
                a.set(k, j, a.get(p, j));
                a.set(p, j, t);
                let t = inv.get(k, j);
                inv.set(k, j, inv.get(p, j));
                inv.set(p, j, t);
            }
            let piv = a.get(k, k);
            for j in 0..n {
                a.set(k, j, a.get(k, j) / piv);
                inv.set(k, j, inv.get(k, j) / piv);
            }
            for i in 0..n {
                if i != k {
                    let f = a.get(i, k);
                    if f != T::zero() {
                        for j in 0..n {
                            a.set(i, j, a.get(i, j) - f * a.get(k, j));
                            inv.set(i, j, inv.get(i, j) - f * inv.get(k, j));
                        }
                    }
                }
            }
        }
        Some(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_known_matrix() {
        let m = Mat::from_fn(3, |i, j| {
            [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]][i][j]
        });
        assert!((m.det() - 18.0_f64).abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs() {
        let m = Mat::from_fn(3, |i, j| {
            [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]][i][j]
        });
        let (w, v) = m.sym_eigen();
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| v.get(i, k) * w[k] * v.get(j, k)).sum();
                assert!((r - m.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let m = Mat::from_fn(2, |i, j| [[4.0, 1.0], [2.0, 3.0]][i][j]);
        let inv = m.inverse().unwrap();
        assert!((inv.get(0, 0) - 0.3_f64).abs() < 1e-12);
        assert!((inv.get(1, 0) + 0.2_f64).abs() < 1e-12);
    }
}
