//! Scalar abstraction shared by the information-theoretic core.
//!
//! Everything that is "just math" (entropies, quantiles, the capacity
//! optimizer, typicality tests) is written against [`Real`], so it runs in
//! `f64` for production and `f32` where memory matters. The protocol
//! simulator is `f64` only.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable by the core routines.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance for "sums to one" checks on probability vectors.
    fn prob_tol() -> Self;

    /// Slack used when a computed quantity is compared against a constraint
    /// it should meet up to rounding.
    fn round_tol() -> Self;

    /// Lossless for the literals used in this crate.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f64 {
    fn prob_tol() -> Self {
        1e-12
    }

    fn round_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn prob_tol() -> Self {
        1e-5
    }

    fn round_tol() -> Self {
        1e-6
    }
}

/// `-p log2 p` with the `0 log 0 = 0` convention.
#[inline]
pub fn neg_plog2p<T: Real>(p: T) -> T {
    if p <= T::zero() {
        T::zero()
    } else {
        -p * p.log2()
    }
}

/// Shannon entropy in bits of a (not necessarily normalized) mass vector.
pub fn entropy<T: Real>(p: &[T]) -> T {
    p.iter().map(|&v| neg_plog2p(v)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_conventions() {
        assert_eq!(entropy(&[1.0f64, 0.0]), 0.0);
        assert!((entropy(&[0.5f64, 0.5]) - 1.0).abs() < 1e-15);
        assert!((entropy(&[0.5f32, 0.5]) - 1.0).abs() < 1e-6);
        assert!((entropy(&[0.1f64, 0.9]) - 0.468_995_593_589_281_2).abs() < 1e-15);
    }
}
