//! Scalar abstraction for the real-valued parts of the analysis.
//!
//! Counts (retweets, h-indices, bin sizes) are integers everywhere. Quantities
//! that are genuinely real (burstiness, cosine similarity, modularity,
//! skepticism) are computed over any [`Scalar`], so the same kernels run in
//! `f32` for bulk work and `f64` for stored artifacts.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossless for every count this crate produces (u64 values below 2^53 for f64).
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable as scalar")
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 representable as scalar")
    }

    fn half() -> Self {
        Self::from_f64_lossy(0.5)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean; `None` for an empty iterator.
pub fn mean<S: Scalar>(values: impl IntoIterator<Item = S>) -> Option<S> {
    let mut n = 0u64;
    let mut total = S::zero();
    for v in values {
        total = total + v;
        n += 1;
    }
    (n > 0).then(|| total / S::from_count(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_empty_is_none() {
        assert_eq!(mean::<f64>(std::iter::empty()), None);
        assert_eq!(mean([1.0f32, 2.0, 6.0]), Some(3.0));
    }
}
