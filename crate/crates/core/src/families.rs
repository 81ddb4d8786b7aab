//! Canonical `h`-indexed initial data.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lattice::PrimitiveModule;
use crate::mode::{Mode, ModeBox};
use crate::quantization::FourierState;

/// `⌊ξ₀/h⌋` componentwise, with a small guard against round-off just below an integer.
pub fn lattice_point(xi0: &[f64], h: f64) -> Mode {
    Mode::new(xi0.iter().map(|x| (x / h + 1e-9).floor() as i64))
}

/// `e_{⌊ξ₀/h⌋}`.
pub fn plane_wave_ladder(xi0: &[f64], h: f64) -> FourierState {
    FourierState::plane_wave(lattice_point(xi0, h))
}

/// `(e_{k₁} + e_{k₂})/√2`.
pub fn plane_wave_pair(k1: Mode, k2: Mode) -> Result<FourierState> {
    check_dim(k1.dim(), k2.dim())?;
    if k1 == k2 {
        return Err(Error::validation("family.modes", "the two plane waves must differ"));
    }
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    FourierState::from_modes(k1.dim(), [(k1, s), (k2, s)])
}

/// `f(y) e^{i⌊ξ₀/h⌋·x}` normalised, where `f` has modes `j = Σ cᵢbᵢ ∈ Λ`
/// (`|cᵢ| ≤ radius`) with coefficients `exp(−|j|²/(2 width²))`.
pub fn transverse_profile(module: &PrimitiveModule, xi0: &[f64], h: f64, width: f64, radius: i64) -> Result<FourierState> {
    check_dim(module.dim(), xi0.len())?;
    if !(width > 0.0) || radius < 0 {
        return Err(Error::validation("family.width", "width must be positive and radius nonnegative"));
    }
    let d = module.dim();
    let carrier = lattice_point(xi0, h);
    let coords = ModeBox::cube(module.rank(), radius);
    let mut u = FourierState::zero(d);
    for c in coords.iter() {
        let mut j = Mode::zero(d);
        for (ci, b) in c.iter().zip(module.basis()) {
            j = &j + &b.scale(*ci);
        }
        let amp = (-(j.norm_sq() as f64) / (2.0 * width * width)).exp();
        u.add_to(&carrier + &j, amp.into());
    }
    Ok(u.normalized())
}

/// Periodised Gaussian packet of spatial width `h^{1/2}` centred at `x₀`
/// with carrier `⌊ξ₀/h⌋`; coefficients `∝ exp(−h|k−k₀|²/2 − i(k−k₀)·x₀)`,
/// truncated at `|k−k₀|_∞ ≤ ⌈6 h^{-1/2}⌉`.
pub fn gaussian_packet(x0: &[f64], xi0: &[f64], h: f64) -> Result<FourierState> {
    check_dim(x0.len(), xi0.len())?;
    let d = x0.len();
    let k0 = lattice_point(xi0, h);
    let reach = (6.0 / h.sqrt()).ceil() as i64;
    let mut u = FourierState::zero(d);
    for off in ModeBox::cube(d, reach).iter() {
        let q = off.norm_sq() as f64;
        let amp = Complex64::from_polar((-h * q / 2.0).exp(), -off.dot_f64(x0));
        u.add_to(&k0 + &off, amp);
    }
    Ok(u.normalized())
}

/// Seeded random state with independent complex Gaussian coefficients on the cube `‖k‖_∞ ≤ n`.
pub fn random_state(dim: usize, n: i64, seed: u64) -> FourierState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = FourierState::zero(dim);
    for k in ModeBox::cube(dim, n).iter() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        u.set(k, Complex64::new(re, im));
    }
    u.normalized()
}

/// Config form of the families above.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FamilySpec {
    PlaneWave { xi0: Vec<crate::decimal::Decimal> },
    PlaneWavePair { k1: Vec<i64>, k2: Vec<i64> },
    Transverse { xi0: Vec<crate::decimal::Decimal>, width: crate::decimal::Decimal, radius: i64 },
    Gaussian { x0: Vec<crate::decimal::Decimal>, xi0: Vec<crate::decimal::Decimal> },
    Random { n: i64, seed: Option<u64> },
}

impl FamilySpec {
    pub fn is_random(&self) -> bool {
        matches!(self, FamilySpec::Random { .. })
    }

    /// The member at scale `h`; `module` is required by the transverse family.
    pub fn build(&self, dim: usize, h: f64, module: Option<&PrimitiveModule>) -> Result<FourierState> {
        let reals = |v: &[crate::decimal::Decimal], field: &str| -> Result<Vec<f64>> {
            if v.len() != dim {
                return Err(Error::validation(field.to_string(), format!("expected {dim} entries")));
            }
            Ok(v.iter().map(|x| x.0).collect())
        };
        match self {
            FamilySpec::PlaneWave { xi0 } => Ok(plane_wave_ladder(&reals(xi0, "family.xi0")?, h)),
            FamilySpec::PlaneWavePair { k1, k2 } => plane_wave_pair(Mode::from(k1.clone()), Mode::from(k2.clone())),
            FamilySpec::Transverse { xi0, width, radius } => {
                let module = module.ok_or_else(|| Error::validation("module", "transverse family needs a module"))?;
                transverse_profile(module, &reals(xi0, "family.xi0")?, h, width.0, *radius)
            }
            FamilySpec::Gaussian { x0, xi0 } => gaussian_packet(&reals(x0, "family.x0")?, &reals(xi0, "family.xi0")?, h),
            FamilySpec::Random { n, seed } => {
                let seed = seed.ok_or_else(|| Error::validation("family.seed", "random families need a seed"))?;
                Ok(random_state(dim, *n, seed))
            }
        }
    }
}
