//! Scalar abstraction for the statistics kernels.
//!
//! The metric arithmetic in [`crate::stats`] does not care whether it runs
//! on `f32` or `f64`, so it is written against this trait. The rest of the
//! crate uses the concrete [`crate::Real`] alias.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::Debug;
use std::iter::Sum;

/// Floating-point scalar usable by the generic metric kernels.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Sum + Debug + Send + Sync + 'static {
    /// Lossless-enough conversion from a count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Send + Sync + 'static {}
