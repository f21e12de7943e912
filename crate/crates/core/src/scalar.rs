//! Floating-point scalar abstraction for the solver math.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Scalar type all solver math is generic over: `f32` or `f64`.
///
/// The crate-root aliases ([`crate::Grid`], [`crate::Params`], ...) pin `f64`,
/// which is what the scenario layer and CLI use.
pub trait Scalar:
    Float + FromPrimitive + Sum<Self> + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Lift an `f64` constant into the scalar type.
    fn cast(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    /// Lift a count into the scalar type.
    fn cast_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }

    /// Lift a channel index into the scalar type.
    fn cast_u32(n: u32) -> Self {
        Self::from_u32(n).expect("index not representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + Sum<T> + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

/// Finite and strictly positive; false for NaN.
pub fn positive<T: Float>(x: T) -> bool {
    x.is_finite() && x > T::zero()
}

/// Finite and nonnegative; false for NaN.
pub fn nonnegative<T: Float>(x: T) -> bool {
    x.is_finite() && x >= T::zero()
}
