use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::oracle::EnumerationSpec;

/// An exact rational in lowest terms with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactValue(BigRational);

impl ExactValue {
    pub fn new(numerator: impl Into<BigInt>, denominator: impl Into<BigInt>) -> Self {
        // BigRational::new reduces and normalises the sign onto the numerator.
        ExactValue(BigRational::new(numerator.into(), denominator.into()))
    }

    pub fn zero() -> Self {
        ExactValue(BigRational::zero())
    }

    pub fn from_ratio(ratio: BigRational) -> Self {
        ExactValue(ratio)
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl std::ops::Sub for &ExactValue {
    type Output = ExactValue;

    fn sub(self, rhs: &ExactValue) -> ExactValue {
        ExactValue(&self.0 - &rhs.0)
    }
}

impl Serialize for ExactValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ExactValue", 3)?;
        s.serialize_field("numerator", &self.0.numer().to_string())?;
        s.serialize_field("denominator", &self.0.denom().to_string())?;
        s.serialize_field("value", &self.to_f64())?;
        s.end()
    }
}

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::from(1u32);
    // acc = C(n - k + i, i) after step i, always an integer.
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

pub(crate) fn binomial_u128(n: u64, k: i64) -> u128 {
    binomial(n, k).to_u128().unwrap_or(u128::MAX)
}

/// Probability of exactly `x` positives among `draws` items drawn without
/// replacement from `item_count` items of which `n_pos` are positive.
///
/// # Panics
///
/// If `n_pos` or `draws` exceeds `item_count`.
pub fn hypergeom_pmf(x: u64, draws: u64, n_pos: u64, item_count: u64) -> ExactValue {
    assert!(n_pos <= item_count, "n_pos {n_pos} > item_count {item_count}");
    assert!(draws <= item_count, "draws {draws} > item_count {item_count}");
    let num = binomial(n_pos, x as i64) * binomial(item_count - n_pos, draws as i64 - x as i64);
    ExactValue::new(BigInt::from(num), BigInt::from(binomial(item_count, draws as i64)))
}

/// Expected Recall@K of a uniformly random ranking: the sum over `x` of
/// `x / N⁺` weighted by the hypergeometric probability of `x` positives in the top K.
pub fn expected_recall_random_ranking(spec: &EnumerationSpec) -> Result<ExactValue> {
    let (n, n_pos, k) = (spec.item_count as u64, spec.n_pos as u64, spec.cutoff_full as u64);
    if n_pos == 0 {
        return Err(Error::NoPositiveSamples);
    }
    let mut sum = BigRational::zero();
    for x in 1..=k.min(n_pos) {
        let weight = BigRational::new(BigInt::from(x), BigInt::from(n_pos));
        sum += weight * hypergeom_pmf(x, k, n_pos, n).0;
    }
    Ok(ExactValue(sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pascal's triangle, built by repeated addition only.
    fn pascal(rows: usize) -> Vec<Vec<BigUint>> {
        let mut tri: Vec<Vec<BigUint>> = vec![vec![BigUint::from(1u32)]];
        for n in 1..=rows {
            let prev = &tri[n - 1];
            let mut row = vec![BigUint::from(1u32)];
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigUint::from(1u32));
            tri.push(row);
        }
        tri
    }

    #[test]
    fn binomial_matches_pascal_triangle() {
        let tri = pascal(60);
        for (n, row) in tri.iter().enumerate() {
            for (k, value) in row.iter().enumerate() {
                assert_eq!(&binomial(n as u64, k as i64), value, "C({n},{k})");
            }
        }
        assert_eq!(tri[52][26], BigUint::from(495_918_532_948_104u64));
    }

    #[test]
    fn binomial_small_and_out_of_range() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(9, 0), BigUint::from(1u32));
        assert_eq!(binomial(0, 0), BigUint::from(1u32));
        assert_eq!(binomial(52, 26), BigUint::from(495_918_532_948_104u64));
        assert!(binomial(4, -1).is_zero());
        assert!(binomial(4, 5).is_zero());
    }

    #[test]
    fn pmf_by_enumerating_draws() {
        // Items 0 and 1 positive among 5; count 2-draws containing exactly one.
        let mut hits = 0;
        let mut total = 0;
        for a in 0..5 {
            for b in (a + 1)..5 {
                total += 1;
                if [a, b].iter().filter(|&&i| i < 2).count() == 1 {
                    hits += 1;
                }
            }
        }
        assert_eq!((hits, total), (6, 10));
        assert_eq!(hypergeom_pmf(1, 2, 2, 5), ExactValue::new(6, 10));
    }

    #[test]
    fn pmf_edges_and_normalisation() {
        assert_eq!(hypergeom_pmf(0, 0, 3, 7), ExactValue::new(1, 1));
        assert!(hypergeom_pmf(4, 3, 5, 9).is_zero());
        for n in 1..=12u64 {
            for n_pos in 0..=n {
                for draws in 0..=n {
                    let total = (0..=draws)
                        .map(|x| hypergeom_pmf(x, draws, n_pos, n).0)
                        .fold(BigRational::zero(), |a, b| a + b);
                    assert_eq!(ExactValue(total), ExactValue::new(1, 1));
                }
            }
        }
    }

    #[test]
    fn expected_recall_closed_form() {
        let spec = EnumerationSpec::ranking(10, 4, 3).unwrap();
        assert_eq!(expected_recall_random_ranking(&spec).unwrap(), ExactValue::new(3, 10));
        let spec = EnumerationSpec::ranking(9, 2, 9).unwrap();
        assert_eq!(expected_recall_random_ranking(&spec).unwrap(), ExactValue::new(1, 1));
        let spec = EnumerationSpec::ranking(9, 0, 3).unwrap();
        assert!(matches!(expected_recall_random_ranking(&spec), Err(Error::NoPositiveSamples)));
    }

    #[test]
    fn expected_recall_by_enumerating_placements() {
        // N=6, N+=2, K=2: average hits/2 over all 15 placements of the two positives.
        let mut sum = 0;
        let mut count = 0;
        for a in 0..6 {
            for b in (a + 1)..6 {
                count += 1;
                sum += [a, b].iter().filter(|&&r| r < 2).count();
            }
        }
        assert_eq!(count, 15);
        let brute = ExactValue::new(sum as i64, 2 * count as i64);
        assert_eq!(brute, ExactValue::new(1, 3));
        let spec = EnumerationSpec::ranking(6, 2, 2).unwrap();
        assert_eq!(expected_recall_random_ranking(&spec).unwrap(), brute);
    }

    #[test]
    fn display_and_serialize() {
        assert_eq!(ExactValue::new(6, 10).to_string(), "3/5");
        assert_eq!(ExactValue::new(-4, 2).to_string(), "-2");
        let json = serde_json::to_string(&ExactValue::new(2, 3)).unwrap();
        assert!(json.starts_with(r#"{"numerator":"2","denominator":"3","value":0.66666"#));
    }
}
