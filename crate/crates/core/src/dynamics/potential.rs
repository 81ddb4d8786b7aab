use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::error::{check_dim, Error, Result};
use crate::lattice::{mode_in, PrimitiveModule};
use crate::mode::Mode;

/// Time modulation `1 + depth · cos(frequency · t + phase)` of the non-constant modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub depth: Decimal,
    pub frequency: Decimal,
    #[serde(default)]
    pub phase: Decimal,
}

impl Modulation {
    pub fn factor(&self, t: f64) -> f64 {
        1.0 + self.depth.0 * (self.frequency.0 * t + self.phase.0).cos()
    }
}

/// A real trigonometric-polynomial potential `V(t, x) = Σ_k v_k(t) e^{ik·x}`.
///
/// Coefficients are Fourier-series coefficients, so `2cos(x₁)` has
/// `v_{±e₁} = 1`. The matrix element `⟨e_j, V e_k⟩` is `v_{j−k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    dim: usize,
    coeffs: BTreeMap<Mode, Complex64>,
    modulation: Option<Modulation>,
}

impl Potential {
    pub fn zero(dim: usize) -> Self {
        Potential { dim, coeffs: BTreeMap::new(), modulation: None }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut v = Self::zero(dim);
        v.add(Mode::zero(dim), c.into());
        v
    }

    /// `amplitude · cos(m·x)`.
    pub fn cosine(m: Mode, amplitude: f64) -> Self {
        let mut v = Self::zero(m.dim());
        if m.is_zero() {
            v.add(m, amplitude.into());
        } else {
            v.add(-&m, (amplitude / 2.0).into());
            v.add(m, (amplitude / 2.0).into());
        }
        v
    }

    /// Builds a potential, rejecting coefficient sets that do not describe a real function.
    pub fn from_modes(dim: usize, modes: impl IntoIterator<Item = (Mode, Complex64)>) -> Result<Self> {
        let mut v = Self::zero(dim);
        for (k, c) in modes {
            check_dim(dim, k.dim())?;
            v.add(k, c);
        }
        v.validate()?;
        Ok(v)
    }

    fn add(&mut self, k: Mode, c: Complex64) {
        let e = self.coeffs.entry(k.clone()).or_default();
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&k);
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, c) in &self.coeffs {
            let partner = self.coefficient(&-k);
            if (partner - c.conj()).norm() > 1e-12 * (1.0 + c.norm()) {
                return Err(Error::validation(
                    "potential.modes",
                    format!("coefficient of {k} is not the conjugate of its partner; V must be real"),
                ));
            }
        }
        Ok(())
    }

    pub fn plus(&self, other: &Potential) -> Potential {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add(k.clone(), *c);
        }
        out.modulation = self.modulation.or(other.modulation);
        out
    }

    pub fn with_modulation(mut self, m: Modulation) -> Self {
        self.modulation = Some(m);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modulation(&self) -> Option<&Modulation> {
        self.modulation.as_ref()
    }

    pub fn is_time_dependent(&self) -> bool {
        self.modulation.is_some() && self.coeffs.keys().any(|k| !k.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Static coefficient `v_k`.
    pub fn coefficient(&self, k: &Mode) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Coefficient at time `t`, including the modulation.
    pub fn coefficient_at(&self, k: &Mode, t: f64) -> Complex64 {
        let c = self.coefficient(k);
        match &self.modulation {
            Some(m) if !k.is_zero() => c * m.factor(t),
            _ => c,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn mode_radius(&self) -> i64 {
        self.coeffs.keys().map(Mode::sup_norm).max().unwrap_or(0)
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        self.coeffs
            .keys()
            .map(|k| (self.coefficient_at(k, t) * Complex64::from_polar(1.0, k.dot_f64(x))).re)
            .sum()
    }

    /// `⟨V⟩_Λ`: the modes of `V` lying in `Λ`.
    pub fn averaged(&self, module: &PrimitiveModule) -> Result<Potential> {
        check_dim(self.dim, module.dim())?;
        let mut out = Potential { coeffs: BTreeMap::new(), ..self.clone() };
        for (k, c) in &self.coeffs {
            if mode_in(k, module)? {
                out.coeffs.insert(k.clone(), *c);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub k: Vec<i64>,
    pub re: Decimal,
    #[serde(default)]
    pub im: Decimal,
}

/// Config form `{"modes": [{"k": [...], "re": x, "im": y}], "time_mod": ...}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(default)]
    pub modes: Vec<ModeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_mod: Option<Modulation>,
}

impl PotentialSpec {
    pub fn build(&self, dim: usize) -> Result<Potential> {
        for (i, e) in self.modes.iter().enumerate() {
            if e.k.len() != dim {
                return Err(Error::validation(
                    format!("potential.modes[{i}].k"),
                    format!("expected {dim} entries, found {}", e.k.len()),
                ));
            }
        }
        let v = Potential::from_modes(
            dim,
            self.modes.iter().map(|e| (Mode::from(e.k.clone()), Complex64::new(e.re.0, e.im.0))),
        )?;
        Ok(match self.time_mod {
            Some(m) => v.with_modulation(m),
            None => v,
        })
    }

    pub fn from_potential(v: &Potential) -> Self {
        PotentialSpec {
            modes: v
                .iter()
                .map(|(k, c)| ModeEntry { k: k.to_vec(), re: c.re.into(), im: c.im.into() })
                .collect(),
            time_mod: v.modulation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::saturate;

    #[test]
    fn real_potential_and_averaging() {
        let v = Potential::cosine(Mode::from([1, 0]), 2.0).plus(&Potential::cosine(Mode::from([0, 1]), 3.0));
        assert!(v.validate().is_ok());
        assert!((v.value(&[0.0, 0.0], 0.0) - 5.0).abs() < 1e-14);
        let lam = saturate(2, &[Mode::from([1, 0])]).unwrap();
        let avg = v.averaged(&lam).unwrap();
        assert_eq!(avg, Potential::cosine(Mode::from([1, 0]), 2.0));
        let bad = Potential::from_modes(1, [(Mode::from([1]), Complex64::new(1.0, 0.0))]);
        assert!(matches!(bad, Err(Error::Validation { .. })));
    }

    #[test]
    fn spec_round_trip() {
        let v = Potential::cosine(Mode::from([2]), 1.5);
        let spec = PotentialSpec::from_potential(&v);
        let text = serde_json::to_string(&spec).unwrap();
        let back: PotentialSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build(1).unwrap(), v);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
