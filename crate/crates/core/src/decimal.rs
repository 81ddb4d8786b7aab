//! Real numbers in config files: written as decimal strings, read from strings or numbers.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An `f64` serialised as its shortest round-trip decimal string.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Decimal(pub f64);

impl Decimal {
    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<f64> for Decimal {
    fn from(v: f64) -> Self {
        Decimal(v)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Decimal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: f64 = p.trim().parse().map_err(|_| format!("invalid number {s:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("invalid number {s:?}"))?;
            if q == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            return Ok(Decimal(p / q));
        }
        match t {
            "pi" => Ok(Decimal(std::f64::consts::PI)),
            "2pi" => Ok(Decimal(std::f64::consts::TAU)),
            _ => t.parse().map(Decimal).map_err(|_| format!("invalid number {s:?}")),
        }
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Decimal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Decimal, E> {
                Ok(Decimal(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Decimal, E> {
                Ok(Decimal(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Decimal, E> {
                Ok(Decimal(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Decimal, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_forms() {
        let d: Decimal = serde_json::from_str("\"0.125\"").unwrap();
        assert_eq!(d.0, 0.125);
        assert_eq!(serde_json::to_string(&d).unwrap(), "\"0.125\"");
        let q: Decimal = serde_json::from_str("\"1/64\"").unwrap();
        assert_eq!(q.0, 1.0 / 64.0);
        let n: Decimal = serde_json::from_str("3").unwrap();
        assert_eq!(n.0, 3.0);
        assert!(serde_json::from_str::<Decimal>("\"abc\"").is_err());
        let x = Decimal(0.1 + 0.2);
        let back: Decimal = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        assert_eq!(back, x);
    }
}
