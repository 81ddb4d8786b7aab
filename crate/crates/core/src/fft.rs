//! Multi-dimensional FFTs on row-major grids and the mode ↔ slot folding used
//! to move between Fourier coefficients and samples on a uniform grid of `T^d`.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::mode::Mode;

/// A uniform grid on `[0, 2π)^d` with `shape[i]` points along axis `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    shape: Vec<usize>,
}

impl Grid {
    pub fn new(shape: Vec<usize>) -> Self {
        assert!(shape.iter().all(|&n| n > 0), "grid axes must be nonempty");
        Grid { shape }
    }

    pub fn cube(dim: usize, points: usize) -> Self {
        Self::new(vec![points; dim])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume element `(2π)^d / #points`.
    pub fn cell_volume(&self) -> f64 {
        self.shape.iter().map(|&n| TAU / n as f64).product()
    }

    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let d = self.dim();
        let mut x = vec![0.0; d];
        for i in (0..d).rev() {
            let n = self.shape[i];
            x[i] = TAU * (idx % n) as f64 / n as f64;
            idx /= n;
        }
        x
    }

    /// Flat slot holding mode `k` (reduced modulo the grid).
    pub fn slot(&self, k: &Mode) -> usize {
        let mut idx = 0usize;
        for (i, &n) in self.shape.iter().enumerate() {
            idx = idx * n + k[i].rem_euclid(n as i64) as usize;
        }
        idx
    }

    /// The representative mode of a slot, centred on zero.
    pub fn slot_mode(&self, mut idx: usize) -> Mode {
        let d = self.dim();
        let mut out = vec![0i64; d];
        for i in (0..d).rev() {
            let n = self.shape[i];
            let r = (idx % n) as i64;
            out[i] = if r >= (n as i64 + 1) / 2 { r - n as i64 } else { r };
            idx /= n;
        }
        Mode::from(out)
    }

    /// Unnormalised in-place transform along every axis.
    ///
    /// `Forward` computes `Σ_x f(x) e^{-ik·x}`; `Inverse` computes `Σ_k f̂(k) e^{ik·x}`.
    pub fn transform(&self, data: &mut [Complex64], direction: FftDirection) {
        GridFft::new(self.clone()).process(data, direction);
    }
}

/// A grid with its per-axis FFT plans, for repeated transforms.
#[derive(Clone)]
pub struct GridFft {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl GridFft {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let forward = grid.shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = grid.shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        GridFft { grid, forward, inverse }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn process(&self, data: &mut [Complex64], direction: FftDirection) {
        assert_eq!(data.len(), self.grid.len());
        let plans = match direction {
            FftDirection::Forward => &self.forward,
            FftDirection::Inverse => &self.inverse,
        };
        let mut stride = 1usize;
        let mut line = Vec::new();
        for axis in (0..self.grid.dim()).rev() {
            let n = self.grid.shape[axis];
            if n > 1 {
                let block = n * stride;
                line.resize(n, Complex64::new(0.0, 0.0));
                for start in (0..data.len()).step_by(block) {
                    for offset in 0..stride {
                        for i in 0..n {
                            line[i] = data[start + offset + i * stride];
                        }
                        plans[axis].process(&mut line);
                        for i in 0..n {
                            data[start + offset + i * stride] = line[i];
                        }
                    }
                }
            }
            stride *= n;
        }
    }
}
