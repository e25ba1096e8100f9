//! Scalar abstraction for probabilities.
//!
//! The Markov analyzer runs over any [`Scalar`]: `f64`/`f32` for speed or
//! [`BigRational`] for exact stationary distributions on small chains.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug + Send + Sync + 'static
{
    /// Whether arithmetic is exact (no rounding).
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used for "sums to one" checks; zero for exact types.
    fn default_tolerance() -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn default_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn default_tolerance() -> Self {
        1e-6
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn default_tolerance() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn ratios() {
        assert_eq!(f64::from_ratio(1, 5), 0.2);
        assert_eq!(
            BigRational::from_ratio(2, 10),
            BigRational::from_ratio(1, 5)
        );
        let fifth = BigRational::from_ratio(1, 5);
        let sum = (0..5).fold(BigRational::from_ratio(0, 1), |acc, _| acc + fifth.clone());
        assert!(sum.is_one());
        assert!((BigRational::from_ratio(1, 3).to_f64_lossy() - 1.0 / 3.0).abs() < 1e-16);
    }
}
