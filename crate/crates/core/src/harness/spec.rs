//! Declarative experiment configuration (JSON; reals as decimal strings, rationals as `"p/q"`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::dynamics::{Potential, PotentialSpec, Scheme, SpectralProfile};
use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::lattice::{hermite_rows, saturate, to_big_rows, PrimitiveModule};
use crate::microlocal::{check_boxes, XiBox};
use crate::mode::Mode;
use crate::observability::ObservationConfig;
use crate::quantization::{EtaProfile, Symbol, SymbolTerm, XiFactor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Classify,
    Evolve,
    Wigner,
    Twomicro,
    SigmaPropagation,
    Marginal,
    Disintegration,
    Observability,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Classify => "classify",
            Kind::Evolve => "evolve",
            Kind::Wigner => "wigner",
            Kind::Twomicro => "twomicro",
            Kind::SigmaPropagation => "sigma-propagation",
            Kind::Marginal => "marginal",
            Kind::Disintegration => "disintegration",
            Kind::Observability => "observability",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolTermSpec {
    /// The x-mode `m` of `e^{im·x}`.
    pub k: Vec<i64>,
    pub re: Decimal,
    #[serde(default)]
    pub im: Decimal,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xi: Vec<XiFactor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub terms: Vec<SymbolTermSpec>,
    /// Common `η`-profile, homogeneous beyond `r0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<Decimal>,
}

impl SymbolSpec {
    pub fn build(&self, dim: usize, field: &str) -> Result<Symbol> {
        if self.terms.is_empty() {
            return Err(Error::validation(format!("{field}.terms"), "a symbol needs at least one term"));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if t.k.len() != dim {
                return Err(Error::validation(format!("{field}.terms[{i}].k"), format!("expected {dim} entries")));
            }
        }
        let s = Symbol::from_terms(
            dim,
            self.terms.iter().map(|t| {
                let mut term = SymbolTerm::constant(Complex64::new(t.re.0, t.im.0));
                term.xi = t.xi.clone();
                (Mode::from(t.k.clone()), term)
            }),
        )?;
        Ok(match &self.eta {
            Some(eta) => s.with_eta(eta.clone(), self.r0.map_or(1.0, |r| r.0)),
            None => s,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiBoxSpec {
    pub lo: Vec<Decimal>,
    pub hi: Vec<Decimal>,
}

/// One experiment. Unused fields for a kind are ignored; required ones are checked by [`ExperimentSpec::validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub d: usize,
    /// Truncation radius (observability) or window padding around the data (dynamics).
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
    #[serde(rename = "N_grid", default, skip_serializing_if = "Vec::is_empty")]
    pub n_grid: Vec<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h_grid: Vec<Decimal>,
    #[serde(rename = "R_grid", default, skip_serializing_if = "Vec::is_empty")]
    pub r_grid: Vec<Decimal>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_samples: Vec<Decimal>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    /// Generators of `Λ`; they must already span a primitive module.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symbols: Vec<SymbolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<ObservationConfig>,
    /// Optional smooth energy window for the observability cross-check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_window: Option<SpectralProfile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xi_boxes: Vec<XiBoxSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frequencies: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_den: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn strictly(v: &[f64], decreasing: bool) -> bool {
    v.windows(2).all(|w| if decreasing { w[1] < w[0] } else { w[1] > w[0] })
}

/// The primitive module spanned by `generators`, or a validation error naming
/// the saturation when the generators span a proper sublattice of it.
pub fn primitive_module(dim: usize, generators: &[Vec<i64>], field: &str) -> Result<PrimitiveModule> {
    for (i, g) in generators.iter().enumerate() {
        if g.len() != dim {
            return Err(Error::validation(format!("{field}[{i}]"), format!("expected {dim} entries")));
        }
    }
    let gens: Vec<Mode> = generators.iter().map(|g| Mode::from(g.clone())).collect();
    let sat = saturate(dim, &gens)?;
    let spanned = hermite_rows(to_big_rows(generators), dim);
    let canonical: Vec<Vec<i64>> = sat.basis().iter().map(Mode::to_vec).collect();
    if spanned != to_big_rows(&canonical) {
        return Err(Error::validation(
            field,
            format!("generators span a non-primitive lattice; use its saturation {canonical:?}"),
        ));
    }
    Ok(sat)
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation("spec", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    pub fn h_values(&self) -> Vec<f64> {
        self.h_grid.iter().map(|x| x.0).collect()
    }

    pub fn r_values(&self) -> Vec<f64> {
        self.r_grid.iter().map(|x| x.0).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.t_samples.iter().map(|x| x.0).collect()
    }

    pub fn pad(&self) -> i64 {
        self.n.unwrap_or(8)
    }

    pub fn radii(&self) -> Vec<i64> {
        if self.n_grid.is_empty() {
            self.n.into_iter().collect()
        } else {
            self.n_grid.clone()
        }
    }

    pub fn potential(&self) -> Result<Potential> {
        match &self.potential {
            Some(p) => p.build(self.d),
            None => Ok(Potential::zero(self.d)),
        }
    }

    pub fn module(&self) -> Result<Option<PrimitiveModule>> {
        self.module.as_ref().map(|g| primitive_module(self.d, g, "module")).transpose()
    }

    pub fn symbols(&self) -> Result<Vec<Symbol>> {
        self.symbols.iter().enumerate().map(|(i, s)| s.build(self.d, &format!("symbols[{i}]"))).collect()
    }

    pub fn boxes(&self) -> Result<Vec<XiBox>> {
        let boxes: Vec<XiBox> = self
            .xi_boxes
            .iter()
            .map(|b| XiBox::new(b.lo.iter().map(|x| x.0).collect(), b.hi.iter().map(|x| x.0).collect()))
            .collect();
        check_boxes(self.d, &boxes).map_err(|e| match e {
            Error::DimensionMismatch { .. } => Error::validation("xi_boxes", e.to_string()),
            other => other,
        })?;
        Ok(boxes)
    }

    fn require<T>(&self, v: &Option<T>, field: &str) -> Result<()> {
        if v.is_none() {
            return Err(Error::validation(field, format!("required for kind {}", self.kind.name())));
        }
        Ok(())
    }

    fn require_nonempty<T>(&self, v: &[T], field: &str, min: usize) -> Result<()> {
        if v.len() < min {
            return Err(Error::validation(field, format!("kind {} needs at least {min} entries", self.kind.name())));
        }
        Ok(())
    }

    /// Field-level validation; every error names the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > 4 {
            return Err(Error::validation("d", "dimension must be between 1 and 4"));
        }
        let h = self.h_values();
        if h.iter().any(|x| !(*x > 0.0)) || !strictly(&h, true) {
            return Err(Error::validation("h_grid", "must be positive and strictly decreasing"));
        }
        let r = self.r_values();
        if r.iter().any(|x| !(*x > 0.0)) || !strictly(&r, false) {
            return Err(Error::validation("R_grid", "must be positive and strictly increasing"));
        }
        if !strictly(&self.times(), false) || self.times().iter().any(|t| !t.is_finite()) {
            return Err(Error::validation("t_samples", "must be finite and strictly increasing"));
        }
        if self.n.is_some_and(|n| n < 0) || self.n_grid.iter().any(|&n| n < 0) {
            return Err(Error::validation("N", "must be nonnegative"));
        }
        if let Some(f) = &self.family {
            if matches!(f, FamilySpec::Random { seed: None, .. }) {
                return Err(Error::validation("family.seed", "randomised families need a seed"));
            }
        }
        self.potential()?;
        self.module()?;
        self.symbols()?;
        if !self.xi_boxes.is_empty() {
            self.boxes()?;
        }
        if let Some(obs) = &self.observation {
            obs.build(self.d).map_err(|e| match e {
                Error::Validation { field, message } => Error::validation(format!("observation.{field}"), message),
                Error::DimensionMismatch { .. } => Error::validation("observation.omega", e.to_string()),
                other => other,
            })?;
        }
        match self.kind {
            Kind::Classify => {
                self.require_nonempty(&self.frequencies, "frequencies", 1)?;
                for (i, f) in self.frequencies.iter().enumerate() {
                    if f.len() != self.d {
                        return Err(Error::validation(format!("frequencies[{i}]"), format!("expected {} entries", self.d)));
                    }
                }
                if self.max_den.is_some_and(|q| q < 1) {
                    return Err(Error::validation("max_den", "must be at least 1"));
                }
            }
            Kind::Evolve | Kind::Marginal => {
                self.require(&self.family, "family")?;
                self.require_nonempty(&h, "h_grid", 1)?;
                self.require_nonempty(&self.t_samples, "t_samples", 1)?;
                if self.kind == Kind::Marginal {
                    self.require_nonempty(&self.xi_boxes, "xi_boxes", 1)?;
                }
            }
            Kind::Wigner => {
                self.require(&self.family, "family")?;
                self.require_nonempty(&h, "h_grid", 1)?;
                self.require_nonempty(&self.symbols, "symbols", 1)?;
            }
            Kind::Twomicro => {
                self.require(&self.family, "family")?;
                self.require(&self.module, "module")?;
                self.require_nonempty(&h, "h_grid", 1)?;
                self.require_nonempty(&r, "R_grid", 1)?;
                self.require_nonempty(&self.symbols, "symbols", 1)?;
            }
            Kind::SigmaPropagation => {
                self.require(&self.family, "family")?;
                self.require(&self.module, "module")?;
                self.require_nonempty(&h, "h_grid", 3)?;
                self.require_nonempty(&r, "R_grid", 2)?;
                self.require_nonempty(&self.t_samples, "t_samples", 1)?;
                self.require_nonempty(&self.symbols, "symbols", 1)?;
                if self.module()?.is_some_and(|m| m.rank() == 0) {
                    return Err(Error::validation("module", "needs rank ≥ 1"));
                }
            }
            Kind::Disintegration => {
                self.require(&self.family, "family")?;
                self.require(&self.horizon, "T")?;
                self.require(&self.grid_points, "grid_points")?;
                self.require_nonempty(&h, "h_grid", 1)?;
                self.require_nonempty(&self.xi_boxes, "xi_boxes", 1)?;
                if !self.horizon.is_some_and(|t| t.0 > 0.0) {
                    return Err(Error::validation("T", "horizon must be positive"));
                }
                if self.grid_points.is_some_and(|g| g < 2) {
                    return Err(Error::validation("grid_points", "need at least 2 points per axis"));
                }
            }
            Kind::Observability => {
                self.require(&self.observation, "observation")?;
                if self.radii().is_empty() {
                    return Err(Error::validation("N", "kind observability needs N or N_grid"));
                }
                if self.potential()?.is_time_dependent() {
                    return Err(Error::validation("potential.time_mod", "observability needs a time-independent potential"));
                }
                if self.spectral_window.is_some() {
                    self.require_nonempty(&h, "h_grid", 1)?;
                }
            }
        }
        Ok(())
    }
}
