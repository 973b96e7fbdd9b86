//! Scalar abstraction: the numerical kernels are generic over the floating
//! point type, with `f64` as the working precision of the command line tools.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating point scalar usable throughout the library: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` literal into the working scalar.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 -> scalar conversion")
}

/// Converts a count into the working scalar.
#[inline]
pub fn cast_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize -> scalar conversion")
}
