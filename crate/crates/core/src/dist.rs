use std::fmt;

use crate::error::{FlashError, Result};
use crate::scalar::Scalar;

/// Per-bit flip probabilities: entry `i` is the chance that bit `i` is the
/// one flipped at a given step.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipDistribution<T> {
    probs: Vec<T>,
}

impl<T: Scalar> FlipDistribution<T> {
    pub fn uniform(k: usize) -> Self {
        FlipDistribution {
            probs: vec![T::from_ratio(1, k as i64); k],
        }
    }

    /// Validates nonnegativity and that the entries sum to one within the
    /// scalar's default tolerance.
    pub fn new(probs: Vec<T>) -> Result<Self> {
        Self::check(&probs, &T::default_tolerance())?;
        Ok(FlipDistribution { probs })
    }

    /// Accepts a sum within `tol` of one and rescales it to sum exactly
    /// (up to rounding) to one.
    pub fn normalized(probs: Vec<T>, tol: &T) -> Result<Self> {
        let sum = Self::check(&probs, tol)?;
        let probs = probs.into_iter().map(|p| p / sum.clone()).collect();
        Ok(FlipDistribution { probs })
    }

    fn check(probs: &[T], tol: &T) -> Result<T> {
        if probs.is_empty() {
            return Err(FlashError::InvalidDistribution("no probabilities".into()));
        }
        if let Some(p) = probs.iter().find(|p| p.is_negative()) {
            return Err(FlashError::InvalidDistribution(format!(
                "negative probability {p:?}"
            )));
        }
        let sum = probs.iter().fold(T::zero(), |acc, p| acc + p.clone());
        if (sum.clone() - T::one()).abs() > *tol {
            return Err(FlashError::InvalidDistribution(format!(
                "probabilities sum to {}, not 1",
                sum.to_f64_lossy()
            )));
        }
        Ok(sum)
    }

    /// Parses `uniform` or a comma-separated list of decimals (`0.2`) or
    /// fractions (`1/5`), checking the sum within `tol`.
    pub fn parse(text: &str, k: usize, tol: &T) -> Result<Self> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("uniform") {
            return Ok(Self::uniform(k));
        }
        let probs = text
            .split(',')
            .map(|t| parse_ratio(t.trim()).map(|(a, b)| T::from_ratio(a, b)))
            .collect::<Result<Vec<_>>>()?;
        if probs.len() != k {
            return Err(FlashError::InvalidDistribution(format!(
                "expected {k} probabilities, got {}",
                probs.len()
            )));
        }
        Self::normalized(probs, tol)
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, bit: usize) -> &T {
        &self.probs[bit]
    }

    /// Bits with nonzero probability.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, _)| i)
    }

    pub fn to_f64(&self) -> FlipDistribution<f64> {
        FlipDistribution {
            probs: self.probs.iter().map(Scalar::to_f64_lossy).collect(),
        }
    }
}

impl<T: Scalar> fmt::Display for FlipDistribution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.probs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", p.to_f64_lossy())?;
        }
        Ok(())
    }
}

/// Exact `(numerator, denominator)` of a decimal or `a/b` literal.
fn parse_ratio(t: &str) -> Result<(i64, i64)> {
    let bad = || FlashError::InvalidDistribution(format!("bad probability {t:?}"));
    if let Some((a, b)) = t.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if b <= 0 {
            return Err(bad());
        }
        return Ok((a, b));
    }
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if frac.len() > 17 || !frac.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let den = 10i64.pow(frac.len() as u32);
    let int: i64 = if int.is_empty() {
        0
    } else {
        int.parse().map_err(|_| bad())?
    };
    let frac: i64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad())?
    };
    if int < 0 || t.starts_with('-') {
        return Err(bad());
    }
    int.checked_mul(den)
        .and_then(|v| v.checked_add(frac))
        .map(|num| (num, den))
        .ok_or_else(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn uniform_sums_to_one() {
        let d = FlipDistribution::<BigRational>::uniform(4);
        assert_eq!(d.probs()[0], BigRational::from_ratio(1, 4));
        assert!(FlipDistribution::<f64>::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(FlipDistribution::<f64>::new(vec![0.5, 0.6]).is_err());
        assert!(FlipDistribution::<f64>::new(vec![1.5, -0.5]).is_err());
        assert!(FlipDistribution::<f64>::new(vec![]).is_err());
        assert!(FlipDistribution::<BigRational>::new(vec![
            BigRational::from_ratio(1, 3),
            BigRational::from_ratio(1, 3),
        ])
        .is_err());
    }

    #[test]
    fn parses_decimals_and_fractions_exactly() {
        let tol = BigRational::from_ratio(0, 1);
        let d = FlipDistribution::<BigRational>::parse("0.2,0.8", 2, &tol).unwrap();
        assert_eq!(d.probs()[0], BigRational::from_ratio(1, 5));
        let d = FlipDistribution::<BigRational>::parse("1/5, 4/5", 2, &tol).unwrap();
        assert_eq!(d.probs()[1], BigRational::from_ratio(4, 5));
        let d = FlipDistribution::<f64>::parse("uniform", 4, &1e-9).unwrap();
        assert_eq!(d.probs(), &[0.25; 4]);
        assert!(FlipDistribution::<f64>::parse("0.5", 2, &1e-9).is_err());
        assert!(FlipDistribution::<f64>::parse("0.5,0.4", 2, &1e-9).is_err());
        assert!(FlipDistribution::<f64>::parse("-0.5,1.5", 2, &1e-9).is_err());
        assert!(FlipDistribution::<f64>::parse("x,1", 2, &1e-9).is_err());
        assert!(FlipDistribution::<f64>::parse("1,0", 2, &1e-9).is_ok());
        assert!(FlipDistribution::<f64>::parse(".5,.5", 2, &1e-9).is_ok());
    }

    #[test]
    fn support_skips_zero_entries() {
        let d = FlipDistribution::<f64>::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(d.support().collect::<Vec<_>>(), vec![1]);
    }
}
