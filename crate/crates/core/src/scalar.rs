//! Floating-point abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Real scalar used throughout the model and solvers: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Midpoint of `lo` and `hi` in log space when both are positive.
#[inline]
pub(crate) fn geometric_mid<T: Scalar>(lo: T, hi: T) -> T {
    if lo > T::zero() && hi > T::zero() {
        (lo * hi).sqrt()
    } else {
        (lo + hi) / (T::one() + T::one())
    }
}
