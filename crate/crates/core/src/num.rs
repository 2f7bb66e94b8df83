//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign};

/// Floating-point scalar the coding and decoding math is generic over.
///
/// Implemented for `f32` and `f64`. The decoder, the channel statistics and
/// the design quantities only need ordinary float arithmetic plus conversion
/// from `f64` literals, which is what this trait bundles.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + MulAssign
    + Sum<Self>
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` constant.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    /// Logistic function `1 / (1 + e^{-x})`.
    fn sigmoid(self) -> Self {
        let one = Self::one();
        one / (one + (-self).exp())
    }
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + AddAssign
        + MulAssign
        + Sum<T>
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}
