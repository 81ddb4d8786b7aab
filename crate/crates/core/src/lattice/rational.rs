use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parses `"p/q"` or `"p"` into a reduced rational with positive denominator.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::ParseRational(s.to_string());
    let (num, den) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p = BigInt::from_str(num).map_err(|_| bad())?;
    let q = BigInt::from_str(den).map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    // BigRational::new reduces and normalises the sign onto the numerator.
    Ok(BigRational::new(p, q))
}

pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// An exact frequency `ξ ∈ Q^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalVector(Vec<BigRational>);

impl RationalVector {
    pub fn new(entries: Vec<BigRational>) -> Self {
        RationalVector(entries)
    }

    pub fn zero(dim: usize) -> Self {
        RationalVector(vec![BigRational::zero(); dim])
    }

    pub fn from_ratios(pairs: &[(i64, i64)]) -> Self {
        RationalVector(
            pairs
                .iter()
                .map(|&(p, q)| BigRational::new(p.into(), q.into()))
                .collect(),
        )
    }

    pub fn from_integers(k: &[i64]) -> Self {
        RationalVector(k.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn parse(items: &[&str]) -> Result<Self> {
        items.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>().map(Self)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Least common multiple of the denominators.
    pub fn common_denominator(&self) -> BigInt {
        use num_integer::Integer;
        self.0.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
    }

    /// `L·ξ` for the least common denominator `L`, an integer vector.
    pub fn cleared(&self) -> Vec<BigInt> {
        let l = self.common_denominator();
        self.0
            .iter()
            .map(|r| (r * BigRational::from_integer(l.clone())).to_integer())
            .collect()
    }

    pub fn dot_integer(&self, k: &[i64]) -> BigRational {
        self.0
            .iter()
            .zip(k)
            .fold(BigRational::zero(), |acc, (r, &c)| acc + r * BigRational::from_integer(c.into()))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn max_abs_f64(&self) -> f64 {
        self.0
            .iter()
            .map(|r| r.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for RationalVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.0.iter().map(format_rational).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map(RationalVector)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        let r = parse_rational("6/-4").unwrap();
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(format_rational(&parse_rational("7").unwrap()), "7/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn serde_uses_p_over_q_strings() {
        let v = RationalVector::from_ratios(&[(1, 3), (-2, 4)]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["1/3","-1/2"]"#);
        let back: RationalVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
