//! `ξ`-marginals of `|û(k)|²` on the lattice `hZ^d` and the box disintegration
//! of time-averaged densities.

use serde::{Deserialize, Serialize};

use crate::dynamics::density::{panel_count, simpson_rule, GridEvaluator};
use crate::dynamics::{Density, PropagatorPlan};
use crate::error::{check_dim, Error, Result};
use crate::fft::Grid;
use crate::linalg::CVector;
use crate::mode::Mode;
use crate::quantization::FourierState;

pub const MASS_THRESHOLD: f64 = 1e-8;

/// Half-open box `lo ≤ ξ < hi` in frequency space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl XiBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        XiBox { lo, hi }
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        xi.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x < h)
    }

    fn overlaps(&self, other: &XiBox) -> bool {
        (0..self.lo.len()).all(|a| self.lo[a] < other.hi[a] && other.lo[a] < self.hi[a])
    }

    /// A regular partition of `[lo, hi)` into `counts[a]` cells along axis `a`.
    pub fn partition(lo: &[f64], hi: &[f64], counts: &[usize]) -> Vec<XiBox> {
        let mut out = vec![XiBox::new(Vec::new(), Vec::new())];
        for a in 0..lo.len() {
            let w = (hi[a] - lo[a]) / counts[a] as f64;
            out = out
                .into_iter()
                .flat_map(|b| {
                    (0..counts[a]).map(move |i| {
                        let mut c = b.clone();
                        c.lo.push(lo[a] + i as f64 * w);
                        c.hi.push(if i + 1 == counts[a] { hi[a] } else { lo[a] + (i + 1) as f64 * w });
                        c
                    })
                })
                .collect();
        }
        out
    }
}

/// Rejects malformed or overlapping boxes.
pub fn check_boxes(dim: usize, boxes: &[XiBox]) -> Result<()> {
    for (i, b) in boxes.iter().enumerate() {
        check_dim(dim, b.lo.len())?;
        check_dim(dim, b.hi.len())?;
        if b.lo.iter().zip(&b.hi).any(|(l, h)| !(l < h)) {
            return Err(Error::validation(format!("boxes[{i}]"), "lo must be below hi on every axis"));
        }
    }
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            if boxes[i].overlaps(&boxes[j]) {
                return Err(Error::OverlappingBoxes { first: i, second: j });
            }
        }
    }
    Ok(())
}

fn box_of(k: &Mode, h: f64, boxes: &[XiBox]) -> Option<usize> {
    let xi: Vec<f64> = k.iter().map(|&c| h * c as f64).collect();
    boxes.iter().position(|b| b.contains(&xi))
}

/// Mass `Σ_{hk ∈ F} |û(k)|²` in each box `F`.
pub fn marginal_xi(u: &FourierState, h: f64, boxes: &[XiBox]) -> Result<Vec<f64>> {
    check_boxes(u.dim(), boxes)?;
    let mut out = vec![0.0; boxes.len()];
    for (k, c) in u.iter() {
        if let Some(i) = box_of(k, h, boxes) {
            out[i] += c.norm_sqr();
        }
    }
    Ok(out)
}

pub fn histogram_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `max_t ‖hist(u(t)) − hist(u₀)‖₁` over the given times.
pub fn marginal_variation(plan: &PropagatorPlan, u0: &FourierState, h: f64, boxes: &[XiBox], times: &[f64]) -> Result<f64> {
    let base = marginal_xi(u0, h, boxes)?;
    let assign: Vec<Option<usize>> = plan.window().iter().map(|k| box_of(&k, h, boxes)).collect();
    let mut worst: f64 = 0.0;
    plan.for_each_vector(u0, times, |_, v| {
        let mut hist = vec![0.0; boxes.len()];
        for (c, a) in v.iter().zip(&assign) {
            if let Some(i) = a {
                hist[*i] += c.norm_sqr();
            }
        }
        worst = worst.max(histogram_distance(&hist, &base));
        Ok(())
    })?;
    Ok(worst)
}

/// Time-averaged density of `u(t)` filtered to each box, normalised by the
/// box's time-averaged mass; boxes with mass below [`MASS_THRESHOLD`] are `None`.
pub fn conditional_density(
    plan: &PropagatorPlan,
    u0: &FourierState,
    t_end: f64,
    h: f64,
    boxes: &[XiBox],
    grid: &Grid,
    panels_per_unit: usize,
) -> Result<Vec<Option<Density>>> {
    check_boxes(u0.dim(), boxes)?;
    check_dim(u0.dim(), grid.dim())?;
    if !(t_end > 0.0) {
        return Err(Error::validation("T", "horizon must be positive"));
    }
    let (nodes, weights) = simpson_rule(t_end, panel_count(t_end, panels_per_unit));
    let assign: Vec<Option<usize>> = plan.window().iter().map(|k| box_of(&k, h, boxes)).collect();
    let eval = GridEvaluator::new(grid, plan.window());
    let mut acc = vec![vec![0.0; grid.len()]; boxes.len()];
    let mut mass = vec![0.0; boxes.len()];
    plan.for_each_vector(u0, &nodes, |i, v| {
        for (b, (rho, m)) in acc.iter_mut().zip(mass.iter_mut()).enumerate() {
            let filtered = CVector::from_iterator(
                v.len(),
                v.iter().zip(&assign).map(|(c, a)| if *a == Some(b) { *c } else { 0.0.into() }),
            );
            let part: f64 = filtered.iter().map(|c| c.norm_sqr()).sum();
            if part > 0.0 {
                *m += weights[i] * part;
                eval.accumulate(&filtered, weights[i], rho);
            }
        }
        Ok(())
    })?;
    Ok(acc
        .into_iter()
        .zip(mass)
        .map(|(rho, m)| {
            let m = m / t_end;
            (m >= MASS_THRESHOLD).then(|| Density::new(grid.clone(), rho.into_iter().map(|v| v / t_end / m).collect()))
        })
        .collect())
}
