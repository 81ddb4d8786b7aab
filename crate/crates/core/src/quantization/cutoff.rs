use serde::{Deserialize, Serialize};

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `C^∞` and flat at both ends.
pub fn smooth_step(t: f64) -> f64 {
    fn f(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = f(t);
        a / (a + f(1.0 - t))
    }
}

/// Smooth bump in the radius: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn bump(radius: f64) -> f64 {
    smooth_step(2.0 - radius)
}

/// Which side of a two-microlocal split a pairing keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Weight `χ`: mass within distance `~Rh` of `Λ^⊥`.
    Inner,
    /// Weight `1 − χ`.
    Outer,
}

/// The radial cutoff `χ(v) = bump(|v|)²` at scale `R`, so `√χ = bump` is smooth.
///
/// `χ = 1` on `|v| ≤ 1`, `χ = 0` on `|v| ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    scale: f64,
}

impl Cutoff {
    pub fn new(scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "cutoff scale must be positive");
        Cutoff { scale }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `χ(v)` for an unscaled argument of length `norm`.
    pub fn chi(norm: f64) -> f64 {
        let b = bump(norm);
        b * b
    }

    pub fn sqrt_chi(norm: f64) -> f64 {
        bump(norm)
    }

    /// `χ(v/R)` for `|v| = norm`.
    pub fn inner(&self, norm: f64) -> f64 {
        Self::chi(norm / self.scale)
    }

    pub fn sqrt_inner(&self, norm: f64) -> f64 {
        Self::sqrt_chi(norm / self.scale)
    }

    pub fn weight(&self, side: Side, norm: f64) -> f64 {
        match side {
            Side::Inner => self.inner(norm),
            Side::Outer => 1.0 - self.inner(norm),
        }
    }

    /// Square root of [`Cutoff::weight`].
    pub fn sqrt_weight(&self, side: Side, norm: f64) -> f64 {
        match side {
            Side::Inner => self.sqrt_inner(norm),
            Side::Outer => (1.0 - self.inner(norm)).max(0.0).sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_shape() {
        assert_eq!(Cutoff::chi(0.0), 1.0);
        assert_eq!(Cutoff::chi(1.0), 1.0);
        assert_eq!(Cutoff::chi(2.0), 0.0);
        assert_eq!(Cutoff::chi(5.0), 0.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = Cutoff::chi(1.0 + i as f64 / 100.0);
            assert!((0.0..=1.0).contains(&v) && v <= prev);
            prev = v;
        }
        let c = Cutoff::new(4.0);
        assert_eq!(c.weight(Side::Inner, 4.0), 1.0);
        assert_eq!(c.weight(Side::Outer, 0.0), 0.0);
        assert!((c.sqrt_inner(6.0).powi(2) - c.inner(6.0)).abs() < 1e-15);
    }
}
