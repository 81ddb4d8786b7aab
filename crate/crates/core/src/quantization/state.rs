use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::linalg::CVector;
use crate::mode::{Mode, ModeBox};

/// A trigonometric polynomial on `T^d`, stored by its coefficients `û(k)`
/// against the orthonormal basis `e_k(x) = e^{ik·x} / (2π)^{d/2}`.
///
/// Zero coefficients are never stored, so the support is exactly the key set.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierState {
    dim: usize,
    coeffs: BTreeMap<Mode, Complex64>,
}

impl FourierState {
    pub fn zero(dim: usize) -> Self {
        FourierState { dim, coeffs: BTreeMap::new() }
    }

    /// The basis vector `e_k`.
    pub fn plane_wave(k: Mode) -> Self {
        let mut s = Self::zero(k.dim());
        s.coeffs.insert(k, Complex64::new(1.0, 0.0));
        s
    }

    pub fn from_modes(dim: usize, modes: impl IntoIterator<Item = (Mode, Complex64)>) -> Result<Self> {
        let mut s = Self::zero(dim);
        for (k, c) in modes {
            check_dim(dim, k.dim())?;
            s.add_to(k, c);
        }
        Ok(s)
    }

    /// Reads a coefficient vector laid out over `window`, dropping exact zeros.
    pub fn from_box_vector(window: &ModeBox, v: &CVector) -> Self {
        let mut s = Self::zero(window.dim());
        for (i, c) in v.iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                s.coeffs.insert(window.mode_at(i), *c);
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, k: &Mode) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn set(&mut self, k: Mode, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    pub fn add_to(&mut self, k: Mode, c: Complex64) {
        let v = self.get(&k) + c;
        self.set(k, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn modes(&self) -> impl Iterator<Item = &Mode> {
        self.coeffs.keys()
    }

    /// Box radius `max ‖k‖_∞` over the support (0 for the zero state).
    pub fn radius(&self) -> i64 {
        self.coeffs.keys().map(Mode::sup_norm).max().unwrap_or(0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Returns the state scaled to unit norm; the zero state is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for c in self.coeffs.values_mut() {
                *c /= n;
            }
        }
        self
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        for c in self.coeffs.values_mut() {
            *c *= s;
        }
        self.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        self
    }

    /// `⟨self, other⟩`, antilinear in the first slot.
    pub fn inner(&self, other: &FourierState) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, a)| a.conj() * other.get(k))
            .sum()
    }

    pub fn sub(&self, other: &FourierState) -> FourierState {
        let mut out = self.clone();
        for (k, c) in other.iter() {
            out.add_to(k.clone(), -c);
        }
        out
    }

    pub fn distance(&self, other: &FourierState) -> f64 {
        self.sub(other).norm()
    }

    /// Keeps only the modes satisfying `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Mode) -> bool) -> FourierState {
        FourierState {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// Point value `u(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        let norm = TAU.powf(-(self.dim as f64) / 2.0);
        self.coeffs
            .iter()
            .map(|(k, c)| c * Complex64::from_polar(norm, k.dot_f64(x)))
            .sum()
    }

    /// Coefficient vector over `window`; fails if the support is not inside it.
    pub fn to_box_vector(&self, window: &ModeBox) -> Result<CVector> {
        let mut v = CVector::zeros(window.len());
        for (k, c) in &self.coeffs {
            let i = window
                .index_of(k)
                .ok_or_else(|| Error::BoxEscape { mode: k.to_vec() })?;
            v[i] = *c;
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_wave_is_normalised_basis_vector() {
        let u = FourierState::plane_wave(Mode::from([2, -1]));
        assert_eq!(u.norm(), 1.0);
        let x = [0.3, 1.1];
        let expected = Complex64::from_polar(1.0 / TAU, 2.0 * 0.3 - 1.1);
        assert!((u.evaluate(&x) - expected).norm() < 1e-15);
        assert_eq!(u.radius(), 2);
    }

    #[test]
    fn box_vector_round_trip_and_escape() {
        let u = FourierState::from_modes(
            1,
            [(Mode::from([1]), Complex64::new(0.5, 0.0)), (Mode::from([-2]), Complex64::i())],
        )
        .unwrap();
        let b = ModeBox::cube(1, 2);
        let v = u.to_box_vector(&b).unwrap();
        assert_eq!(FourierState::from_box_vector(&b, &v), u);
        assert!(matches!(u.to_box_vector(&ModeBox::cube(1, 1)), Err(Error::BoxEscape { .. })));
    }
}
