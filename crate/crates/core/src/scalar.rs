//! Floating-point abstraction shared by every numeric layer.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the statistical kernels are written against: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Smallest absolute tolerance that is meaningful for quadrature in this precision.
    fn tolerance_floor() -> Self;
}

impl Scalar for f32 {
    fn tolerance_floor() -> Self {
        1.0e-5
    }
}

impl Scalar for f64 {
    fn tolerance_floor() -> Self {
        1.0e-13
    }
}

/// Lossy conversion of an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Conversion of a count into `T`.
#[inline]
pub fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}
