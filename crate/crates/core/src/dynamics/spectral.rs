use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::quantization::{smooth_step, FourierState};

use super::plan::PropagatorPlan;

/// Profile `χ` for the energy cutoff `χ(h²H)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralProfile {
    /// Smooth window: 1 on `[lo, hi]`, 0 outside `(lo − ramp, hi + ramp)`.
    Window { lo: Decimal, hi: Decimal, ramp: Decimal },
    Constant { value: Decimal },
    /// Indicator of `[lo, hi]`.
    Sharp { lo: Decimal, hi: Decimal },
}

impl SpectralProfile {
    /// The default dyadic block: 1 on `[3/4, 3/2]`, supported in `(1/4, 2)`.
    pub fn dyadic() -> Self {
        SpectralProfile::Window { lo: 0.75.into(), hi: 1.5.into(), ramp: 0.5.into() }
    }

    pub fn eval(&self, e: f64) -> f64 {
        match *self {
            SpectralProfile::Window { lo, hi, ramp } => {
                smooth_step((e - lo.0) / ramp.0 + 1.0) * smooth_step((hi.0 - e) / ramp.0 + 1.0)
            }
            SpectralProfile::Constant { value } => value.0,
            SpectralProfile::Sharp { lo, hi } => {
                if lo.0 <= e && e <= hi.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// `Π_h u = χ(h²H) u`, computed in the plan's eigenbasis.
pub fn spectral_cutoff(u: &FourierState, plan: &PropagatorPlan, h: f64, profile: &SpectralProfile) -> Result<FourierState> {
    if plan.potential().is_time_dependent() {
        return Err(Error::TimeDependentPotential { operation: "spectral_cutoff" });
    }
    let (values, vectors) = plan.eigen().ok_or(Error::NoEigenbasis)?;
    let c = plan.eigen_coordinates(u)?;
    let weighted = CVector::from_iterator(
        c.len(),
        c.iter().zip(&values).map(|(x, &e)| x * Complex64::new(profile.eval(h * h * e), 0.0)),
    );
    Ok(FourierState::from_box_vector(plan.window(), &(vectors * weighted)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Potential, Scheme};
    use crate::mode::{Mode, ModeBox};

    #[test]
    fn free_cutoff_is_diagonal() {
        let plan = PropagatorPlan::new(Potential::zero(1), ModeBox::cube(1, 20), Scheme::ExactFree).unwrap();
        let u = FourierState::from_modes(1, (-20..=20).map(|k| (Mode::from([k]), Complex64::new(1.0, 0.0)))).unwrap();
        let h = 0.1;
        let p = SpectralProfile::dyadic();
        let out = spectral_cutoff(&u, &plan, h, &p).unwrap();
        for k in -20..=20i64 {
            let w = p.eval(h * h * (k * k) as f64 / 2.0);
            assert!((out.get(&Mode::from([k])).re - w).abs() < 1e-14);
        }
        let one = SpectralProfile::Constant { value: 1.0.into() };
        assert!(spectral_cutoff(&u, &plan, h, &one).unwrap().distance(&u) < 1e-14);
    }

    #[test]
    fn cutoff_contracts_with_potential() {
        let plan = PropagatorPlan::new(Potential::cosine(Mode::from([1]), 2.0), ModeBox::cube(1, 24), Scheme::Eigenbasis).unwrap();
        let u = FourierState::from_modes(1, (-12..=12).map(|k| (Mode::from([k]), Complex64::new(1.0 / (1.0 + k as f64 * k as f64), 0.3)))).unwrap();
        let out = spectral_cutoff(&u, &plan, 0.1, &SpectralProfile::dyadic()).unwrap();
        assert!(out.norm() <= u.norm());
        let sharp = SpectralProfile::Sharp { lo: 0.5.into(), hi: 2.0.into() };
        let once = spectral_cutoff(&u, &plan, 0.1, &sharp).unwrap();
        let twice = spectral_cutoff(&once, &plan, 0.1, &sharp).unwrap();
        assert!(once.distance(&twice) < 1e-12);
    }
}
