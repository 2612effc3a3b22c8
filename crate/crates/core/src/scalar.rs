//! Scalar abstraction shared by the dense algebra layer.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar the matrix calculus is generic over (`f32`, `f64`).
///
/// Tolerances and finite-difference steps throughout the crate are tuned for
/// `f64`; `f32` instantiations work but carry correspondingly looser accuracy.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
