//! Integer frequency vectors and rectangular windows of them.

use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// An integer vector `k ∈ Z^d`, used both as a Fourier mode and as a lattice vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mode(SmallVec<[i64; 4]>);

impl Mode {
    pub fn new(entries: impl IntoIterator<Item = i64>) -> Self {
        Mode(entries.into_iter().collect())
    }

    pub fn zero(dim: usize) -> Self {
        Mode(SmallVec::from_elem(0, dim))
    }

    /// Unit vector along `axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut m = Self::zero(dim);
        m.0[axis] = 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.0.to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn dot(&self, other: &Mode) -> i64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn dot_f64(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(&a, b)| a as f64 * b).sum()
    }

    pub fn norm_sq(&self) -> i64 {
        self.dot(self)
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn scale(&self, s: i64) -> Mode {
        Mode(self.0.iter().map(|c| c * s).collect())
    }

    pub fn to_f64(&self) -> SmallVec<[f64; 4]> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &i64> {
        self.0.iter()
    }
}

impl Index<usize> for Mode {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl<'a> Add<&'a Mode> for &'a Mode {
    type Output = Mode;
    fn add(self, rhs: &Mode) -> Mode {
        Mode(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a Mode> for &'a Mode {
    type Output = Mode;
    fn sub(self, rhs: &Mode) -> Mode {
        Mode(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode(self.0.iter().map(|c| -c).collect())
    }
}

impl From<Vec<i64>> for Mode {
    fn from(v: Vec<i64>) -> Self {
        Mode(v.into())
    }
}

impl From<&[i64]> for Mode {
    fn from(v: &[i64]) -> Self {
        Mode(v.into())
    }
}

impl<const N: usize> From<[i64; N]> for Mode {
    fn from(v: [i64; N]) -> Self {
        Mode(v.iter().copied().collect())
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for Mode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Vec::<i64>::deserialize(d).map(Mode::from)
    }
}

/// A rectangular window `lo ≤ k ≤ hi` (componentwise) of integer modes, indexed
/// in row-major order with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeBox {
    lo: Mode,
    hi: Mode,
}

impl ModeBox {
    /// `lo` and `hi` must have equal dimension and `lo ≤ hi` componentwise.
    pub fn new(lo: Mode, hi: Mode) -> Self {
        assert_eq!(lo.dim(), hi.dim(), "box corners of different dimension");
        assert!(
            lo.iter().zip(hi.iter()).all(|(a, b)| a <= b),
            "empty mode box {lo:?}..{hi:?}"
        );
        ModeBox { lo, hi }
    }

    /// The origin-centred cube `‖k‖_∞ ≤ radius`.
    pub fn cube(dim: usize, radius: i64) -> Self {
        Self::new(Mode::new(vec![-radius; dim]), Mode::new(vec![radius; dim]))
    }

    /// Smallest box containing every mode of `modes`, widened by `pad` on each side.
    pub fn bounding<'a>(dim: usize, modes: impl IntoIterator<Item = &'a Mode>, pad: i64) -> Self {
        let mut lo = vec![i64::MAX; dim];
        let mut hi = vec![i64::MIN; dim];
        let mut any = false;
        for m in modes {
            any = true;
            for i in 0..dim {
                lo[i] = lo[i].min(m[i]);
                hi[i] = hi[i].max(m[i]);
            }
        }
        if !any {
            return Self::cube(dim, pad);
        }
        Self::new(
            Mode::new(lo.into_iter().map(|c| c - pad)),
            Mode::new(hi.into_iter().map(|c| c + pad)),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &Mode {
        &self.lo
    }

    pub fn hi(&self) -> &Mode {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|a| self.extent(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, k: &Mode) -> bool {
        k.dim() == self.dim()
            && (0..self.dim()).all(|i| self.lo[i] <= k[i] && k[i] <= self.hi[i])
    }

    pub fn index_of(&self, k: &Mode) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let mut idx = 0usize;
        for i in 0..self.dim() {
            idx = idx * self.extent(i) + (k[i] - self.lo[i]) as usize;
        }
        Some(idx)
    }

    pub fn mode_at(&self, mut idx: usize) -> Mode {
        let d = self.dim();
        let mut out = vec![0i64; d];
        for i in (0..d).rev() {
            let e = self.extent(i);
            out[i] = self.lo[i] + (idx % e) as i64;
            idx /= e;
        }
        Mode::from(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.len()).map(move |i| self.mode_at(i))
    }

    /// The box grown by `pad` in every direction.
    pub fn padded(&self, pad: i64) -> Self {
        Self::new(
            Mode::new(self.lo.iter().map(|c| c - pad)),
            Mode::new(self.hi.iter().map(|c| c + pad)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_indexing_round_trips() {
        let b = ModeBox::new(Mode::from([-2, 3]), Mode::from([1, 5]));
        assert_eq!(b.len(), 12);
        for (i, k) in b.iter().enumerate() {
            assert_eq!(b.index_of(&k), Some(i));
        }
        assert_eq!(b.index_of(&Mode::from([2, 3])), None);
    }

    #[test]
    fn zero_dimensional_box_has_one_point() {
        let b = ModeBox::cube(0, 3);
        assert_eq!(b.len(), 1);
        assert_eq!(b.index_of(&Mode::zero(0)), Some(0));
    }
}
