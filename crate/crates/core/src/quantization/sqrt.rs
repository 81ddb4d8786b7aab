//! Square-root symbols: `‖Op_h(a) − Op_h(√a)²‖` on a truncated box.

use std::collections::HashMap;

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{check_dim, Error, Result};
use crate::fft::Grid;
use crate::linalg::{spectral_norm, CMatrix};
use crate::mode::{Mode, ModeBox};

use super::cutoff::{Cutoff, Side};
use super::symbol::Symbol;
use super::weyl::Midpoint;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqrtDefectConfig {
    /// Radius of the cube on which the operator norm is taken.
    pub window: i64,
    /// Extra radius for the intermediate index of `Op_h(√a)²`.
    pub pad: i64,
    /// Grid points per axis for the x-Fourier transform of `√a`.
    pub grid: usize,
    /// Optional two-microlocal weight `w(P_Λξ/Rh)` multiplying `a` (module from the symbol tag).
    pub cutoff: Option<(Cutoff, Side)>,
}

impl SqrtDefectConfig {
    pub fn new(window: i64) -> Self {
        SqrtDefectConfig { window, pad: window.max(8), grid: 64, cutoff: None }
    }

    pub fn with_cutoff(mut self, cutoff: Cutoff, side: Side) -> Self {
        self.cutoff = Some((cutoff, side));
        self
    }
}

fn rule_for(a: &Symbol, cfg: &SqrtDefectConfig) -> Result<Midpoint> {
    match (a.module(), cfg.cutoff) {
        (Some(m), Some((c, side))) => Ok(Midpoint::lifted(m).with_level(m, c, side)),
        (Some(m), None) => Ok(Midpoint::lifted(m)),
        (None, Some(_)) => Err(Error::MissingModuleTag),
        (None, None) => Ok(Midpoint::plain()),
    }
}

/// Operator-norm defect `‖Op_h(ã) − Op_h(√ã)²‖` with `ã = w·a` at scale `h`.
///
/// The x-Fourier coefficients of `√ã(·, ξ)` are computed by FFT for each
/// midpoint frequency. Sampled values of `ã` below `−1e-12` are rejected.
pub fn sqrt_symbol_defect(a: &Symbol, h: f64, cfg: &SqrtDefectConfig) -> Result<f64> {
    let d = a.dim();
    let rule = rule_for(a, cfg)?;
    let grid = Grid::cube(d, cfg.grid);
    let half = (cfg.grid / 2) as i64 - 1;
    let window = ModeBox::cube(d, cfg.window);
    let outer = ModeBox::cube(d, cfg.window + cfg.pad);
    let points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();

    let mut root_coeffs: HashMap<Mode, Vec<Complex64>> = HashMap::new();
    let mut root = |s: &Mode| -> Result<Vec<Complex64>> {
        if let Some(c) = root_coeffs.get(s) {
            return Ok(c.clone());
        }
        let (w, eta) = rule.eval(s);
        let xi: Vec<f64> = s.iter().map(|&c| h * c as f64 / 2.0).collect();
        let mut data = Vec::with_capacity(points.len());
        for x in &points {
            let v = a.value(x, &xi, &eta) * w;
            if v.re < -1e-12 {
                return Err(Error::NegativeSymbol { value: v.re });
            }
            if v.im.abs() > 1e-9 * (1.0 + v.re.abs()) {
                return Err(Error::validation("symbol", "square root requires a real-valued symbol"));
            }
            data.push(Complex64::new(v.re.max(0.0).sqrt(), 0.0));
        }
        grid.transform(&mut data, FftDirection::Forward);
        let n = grid.len() as f64;
        for c in data.iter_mut() {
            *c /= n;
        }
        root_coeffs.insert(s.clone(), data.clone());
        Ok(data)
    };

    let n_out = outer.len();
    let mut b = CMatrix::zeros(n_out, n_out);
    for (ci, k) in outer.iter().enumerate() {
        for (ri, j) in outer.iter().enumerate() {
            let m = &j - &k;
            if m.sup_norm() > half {
                continue;
            }
            let coeffs = root(&(&j + &k))?;
            b[(ri, ci)] = coeffs[grid.slot(&m)];
        }
    }
    check_dim(d, window.dim())?;
    let b2 = &b * &b;
    let op = rule.matrix(a, h, &window);
    let idx: Vec<usize> = window.iter().map(|k| outer.index_of(&k).expect("window inside outer box")).collect();
    let diff = CMatrix::from_fn(window.len(), window.len(), |r, c| op[(r, c)] - b2[(idx[r], idx[c])]);
    Ok(spectral_norm(&diff))
}
