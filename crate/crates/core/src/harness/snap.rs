//! Snapping measured frequencies to exact rationals.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::lattice::RationalVector;

/// Residual above which a snapped vector is tagged non-resonant.
pub const SNAP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapReport {
    pub value: RationalVector,
    pub residuals: Vec<f64>,
    /// Some residual exceeds [`SNAP_TOLERANCE`]; the frequency is treated as `Λ = {0}`.
    pub non_resonant: bool,
}

/// Closest `p/q` to `x` with `1 ≤ q ≤ max_den` (continued fractions with the
/// final semiconvergent).
pub fn best_rational(x: f64, max_den: i64) -> (i64, i64) {
    assert!(max_den >= 1 && x.is_finite());
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        let ai = a as i64;
        let q2 = q0 + ai * q1;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p0 + ai * p1, q2);
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    let k = (max_den - q0) / q1;
    let semi = (p0 + k * p1, q0 + k * q1);
    let err = |(p, q): (i64, i64)| (x - p as f64 / q as f64).abs();
    if k > 0 && err(semi) < err((p1, q1)) {
        semi
    } else {
        (p1, q1)
    }
}

pub fn snap_frequency(x: &[f64], max_den: i64) -> SnapReport {
    let max_den = max_den.max(1);
    let mut entries = Vec::with_capacity(x.len());
    let mut residuals = Vec::with_capacity(x.len());
    for &v in x {
        let (p, q) = best_rational(v, max_den);
        residuals.push((v - p as f64 / q as f64).abs());
        entries.push(BigRational::new(p.into(), q.into()));
    }
    let non_resonant = residuals.iter().any(|r| *r > SNAP_TOLERANCE);
    SnapReport { value: RationalVector::new(entries), residuals, non_resonant }
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    #[test]
    fn snapping() {
        let r = snap_frequency(&[0.5, 0.25], 10);
        assert_eq!(r.value, RationalVector::from_ratios(&[(1, 2), (1, 4)]));
        assert_eq!(r.residuals, vec![0.0, 0.0]);
        assert!(!r.non_resonant);

        let r = snap_frequency(&[0.333333333, 1.0], 10);
        assert_eq!(r.value, RationalVector::from_ratios(&[(1, 3), (1, 1)]));
        assert!(r.residuals[0] < 1e-8 && !r.non_resonant);

        let r = snap_frequency(&[1.41421356, 1.0], 10);
        assert_eq!(r.value, RationalVector::from_ratios(&[(7, 5), (1, 1)]));
        assert!(r.non_resonant);
    }

    #[test]
    fn best_rational_matches_a_denominator_scan() {
        for &x in &[0.1234, -2.71828, 3.14159265, 0.999, 1e-4, -0.5] {
            for max_den in [1, 2, 7, 10, 113] {
                let (p, q) = best_rational(x, max_den);
                let got = (x - p as f64 / q as f64).abs();
                let best = (1..=max_den)
                    .map(|q| (x - (x * q as f64).round() / q as f64).abs())
                    .fold(f64::INFINITY, f64::min);
                assert!(q <= max_den && got <= best + 1e-15, "{x} {max_den}: {p}/{q}");
            }
        }
    }
}
