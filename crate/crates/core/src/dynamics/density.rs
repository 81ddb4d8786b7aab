use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{check_dim, Error, Result};
use crate::fft::{Grid, GridFft};
use crate::linalg::CVector;
use crate::mode::{Mode, ModeBox};
use crate::quantization::FourierState;

use super::plan::PropagatorPlan;

pub const DEFAULT_PANELS_PER_UNIT: usize = 1000;

/// Composite Simpson nodes and weights on `[0, t_end]` with an even panel count.
pub fn simpson_rule(t_end: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let n = panels.max(2) + panels % 2;
    let step = t_end / n as f64;
    let nodes = (0..=n).map(|i| i as f64 * step).collect();
    let weights = (0..=n)
        .map(|i| {
            let c = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * step / 3.0
        })
        .collect();
    (nodes, weights)
}

/// Panel count for a horizon at the given density of panels per unit time.
pub fn panel_count(t_end: f64, per_unit: usize) -> usize {
    let n = (t_end.abs() * per_unit as f64).ceil() as usize;
    n.max(2).div_ceil(2) * 2
}

/// Samples of a density on a uniform grid of `T^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    grid: Grid,
    values: Vec<f64>,
}

impl Density {
    pub fn new(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len());
        Density { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Riemann sum over the grid (exact for trigonometric polynomials resolved by it).
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Largest deviation from the flat density `mass/(2π)^d`.
    pub fn flatness(&self) -> f64 {
        let flat = self.total_mass() / TAU.powi(self.grid.dim() as i32);
        self.values.iter().map(|v| (v - flat).abs()).fold(0.0, f64::max)
    }

    /// Fourier-series coefficients `c_k = (2π)^{-d} ∫ ρ e^{-ik·x} dx` for every grid slot.
    pub fn fourier_coefficients(&self) -> Vec<(Mode, Complex64)> {
        let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.transform(&mut data, FftDirection::Forward);
        let n = self.grid.len() as f64;
        let mut out: Vec<(Mode, Complex64)> =
            data.iter().enumerate().map(|(i, c)| (self.grid.slot_mode(i), c / n)).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// `max_{k ≠ 0} |c_k|`.
    pub fn max_nonzero_coefficient(&self) -> f64 {
        self.fourier_coefficients()
            .iter()
            .filter(|(k, _)| !k.is_zero())
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `x1,…,xd,value`.
    pub fn to_csv(&self) -> String {
        let d = self.grid.dim();
        let mut s = (1..=d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
        s.push_str(",value\n");
        for (i, v) in self.values.iter().enumerate() {
            for x in self.grid.point(i) {
                write!(s, "{x},").expect("write to string");
            }
            writeln!(s, "{v}").expect("write to string");
        }
        s
    }
}

/// Evaluates `|u|²` on the grid (exact at grid points for any support).
pub(crate) struct GridEvaluator {
    fft: GridFft,
    slots: Vec<usize>,
    norm: f64,
}

impl GridEvaluator {
    pub(crate) fn new(grid: &Grid, window: &ModeBox) -> Self {
        GridEvaluator {
            fft: GridFft::new(grid.clone()),
            slots: window.iter().map(|k| grid.slot(&k)).collect(),
            norm: TAU.powi(-(grid.dim() as i32)),
        }
    }

    pub(crate) fn accumulate(&self, v: &CVector, weight: f64, acc: &mut [f64]) {
        let mut data = vec![Complex64::new(0.0, 0.0); self.fft.grid().len()];
        for (c, &s) in v.iter().zip(&self.slots) {
            data[s] += c;
        }
        self.fft.process(&mut data, FftDirection::Inverse);
        for (a, z) in acc.iter_mut().zip(&data) {
            *a += weight * self.norm * z.norm_sqr();
        }
    }
}

/// `x ↦ (1/T)∫₀^T |u(t, x)|² dt` by composite Simpson on `grid`.
pub fn time_averaged_density(
    plan: &PropagatorPlan,
    u0: &FourierState,
    t_end: f64,
    grid: &Grid,
    panels_per_unit: usize,
) -> Result<Density> {
    if plan.module().is_some() {
        return Err(Error::ModeMismatch("densities are defined for ambient plans only".into()));
    }
    if !(t_end > 0.0) {
        return Err(Error::validation("T", "horizon must be positive"));
    }
    check_dim(plan.window().dim(), grid.dim())?;
    let (nodes, weights) = simpson_rule(t_end, panel_count(t_end, panels_per_unit));
    let eval = GridEvaluator::new(grid, plan.window());
    let mut acc = vec![0.0; grid.len()];
    plan.for_each_vector(u0, &nodes, |i, v| {
        eval.accumulate(v, weights[i], &mut acc);
        Ok(())
    })?;
    for a in acc.iter_mut() {
        *a /= t_end;
    }
    Ok(Density::new(grid.clone(), acc))
}
