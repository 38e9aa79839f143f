//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type accepted by the library. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion to `f64`, used for reporting and tolerances.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// `0.5 * log2(x)`, the basic Gaussian rate unit.
#[inline]
pub(crate) fn half_log2<T: Real>(x: T) -> T {
    lit::<T>(0.5) * x.log2()
}

/// `0.5 * log2(1 + snr)` with `snr = +inf` mapped to `+inf`.
#[inline]
pub(crate) fn awgn<T: Real>(snr: T) -> T {
    if snr.is_infinite() {
        T::infinity()
    } else {
        lit::<T>(0.5) * snr.ln_1p() / T::LN_2()
    }
}

/// `num / den` with `x / 0 = +inf` for positive `x` and `0 / 0 = 0`.
#[inline]
pub(crate) fn ratio<T: Real>(num: T, den: T) -> T {
    if den > T::zero() {
        num / den
    } else if num > T::zero() {
        T::infinity()
    } else {
        T::zero()
    }
}

/// Relative tolerance used for degeneracy tests: `max(1e-12, 1e3 * eps)`.
#[inline]
pub(crate) fn degeneracy_tol<T: Real>() -> T {
    lit::<T>(1e-12).max(T::epsilon() * lit::<T>(1e3))
}
