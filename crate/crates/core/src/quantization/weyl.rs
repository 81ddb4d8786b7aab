//! Fourier matrix elements of `Op_h(a)`.
//!
//! With the orthonormal basis `e_k`, `⟨e_j, Op_h(a) e_k⟩ = c_{j−k}(h(j+k)/2)`
//! where `c_m` is the Fourier-series coefficient of the symbol.

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::lattice::{geometry, mode_in, PrimitiveModule};
use crate::linalg::CMatrix;
use crate::mode::{Mode, ModeBox};

use super::cutoff::{Cutoff, Side};
use super::state::FourierState;
use super::symbol::{Symbol, SymbolTerm};

/// One level of a midpoint filter: weight `w(|P(j+k)| / 2R)`.
#[derive(Clone, Debug)]
struct Level {
    projector: Vec<Vec<f64>>,
    cutoff: Cutoff,
    side: Side,
}

/// Evaluation rule for a matrix element at the Weyl midpoint: the `η`-slot
/// `P_Λ(j+k)/2` (or 0) and a product of cutoff weights.
#[derive(Clone, Debug, Default)]
pub struct Midpoint {
    eta_projector: Option<Vec<Vec<f64>>>,
    levels: Vec<Level>,
}

fn apply_projector(p: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    p.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Midpoint {
    /// Plain Weyl quantization: `η` frozen at 0, no weight.
    pub fn plain() -> Self {
        Midpoint::default()
    }

    /// `η = P_Λ(j+k)/2`, no weight.
    pub fn lifted(module: &PrimitiveModule) -> Self {
        Midpoint { eta_projector: Some(geometry(module).projector_f64().to_vec()), levels: Vec::new() }
    }

    /// Adds the weight `w(P_Λ(j+k)/2R)` for the given side.
    pub fn with_level(mut self, module: &PrimitiveModule, cutoff: Cutoff, side: Side) -> Self {
        self.levels.push(Level { projector: geometry(module).projector_f64().to_vec(), cutoff, side });
        self
    }

    /// Returns `(weight, η)` for the mode sum `s = j + k`.
    pub fn eval(&self, s: &Mode) -> (f64, Vec<f64>) {
        let half: Vec<f64> = s.iter().map(|&c| c as f64 / 2.0).collect();
        let weight = self
            .levels
            .iter()
            .map(|l| l.cutoff.weight(l.side, euclid(&apply_projector(&l.projector, &half))))
            .product();
        let eta = match &self.eta_projector {
            Some(p) => apply_projector(p, &half),
            None => vec![0.0; s.dim()],
        };
        (weight, eta)
    }

    fn element(&self, a: &Symbol, terms: &[SymbolTerm], h: f64, j: &Mode, k: &Mode) -> Complex64 {
        let s = j + k;
        let (w, eta) = self.eval(&s);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let xi: Vec<f64> = s.iter().map(|&c| h * c as f64 / 2.0).collect();
        a.eval_terms(terms, &xi, &eta) * w
    }

    /// `⟨e_j, Op(a) e_k⟩` under this rule.
    pub fn matrix_element(&self, a: &Symbol, h: f64, j: &Mode, k: &Mode) -> Complex64 {
        match a.mode_terms().find(|(m, _)| **m == j - k) {
            Some((_, terms)) => self.element(a, terms, h, j, k),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `⟨u, Op(a) u⟩`.
    pub fn pair(&self, u: &FourierState, a: &Symbol, h: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, terms) in a.mode_terms() {
            for (k, uk) in u.iter() {
                let j = k + m;
                let uj = u.get(&j);
                if uj == Complex64::new(0.0, 0.0) {
                    continue;
                }
                acc += uj.conj() * uk * self.element(a, terms, h, &j, k);
            }
        }
        acc
    }

    /// Matrix of `Op(a)` restricted to `window` (rows and columns in box order).
    pub fn matrix(&self, a: &Symbol, h: f64, window: &ModeBox) -> CMatrix {
        let n = window.len();
        let mut out = CMatrix::zeros(n, n);
        for (ci, k) in window.iter().enumerate() {
            for (m, terms) in a.mode_terms() {
                let j = &k + m;
                if let Some(ri) = window.index_of(&j) {
                    out[(ri, ci)] = self.element(a, terms, h, &j, &k);
                }
            }
        }
        out
    }
}

pub fn matrix_element(a: &Symbol, h: f64, j: &Mode, k: &Mode) -> Complex64 {
    Midpoint::plain().matrix_element(a, h, j, k)
}

/// `Op_h(a) u`. Fails if an output mode leaves the cube `‖k‖_∞ ≤ bound`.
pub fn apply(a: &Symbol, h: f64, u: &FourierState, bound: i64) -> Result<FourierState> {
    check_dim(a.dim(), u.dim())?;
    let rule = Midpoint::plain();
    let mut out = FourierState::zero(u.dim());
    for (m, terms) in a.mode_terms() {
        for (k, uk) in u.iter() {
            let j = k + m;
            if j.sup_norm() > bound {
                return Err(Error::BoxBound { bound, mode: j.to_vec() });
            }
            let v = rule.element(a, terms, h, &j, k) * uk;
            out.add_to(j, v);
        }
    }
    Ok(out)
}

/// `⟨u, Op_h(a) u⟩`.
pub fn wigner_pair(u: &FourierState, a: &Symbol, h: f64) -> Complex64 {
    Midpoint::plain().pair(u, a, h)
}

pub fn operator_matrix(a: &Symbol, h: f64, window: &ModeBox) -> CMatrix {
    Midpoint::plain().matrix(a, h, window)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorReport {
    /// Largest absolute deviation over matrix elements.
    pub defect: f64,
    /// Largest absolute entry of either side, for relative comparisons.
    pub scale: f64,
}

impl CommutatorReport {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.defect
        } else {
            self.defect / self.scale
        }
    }
}

/// Compares `⟨e_j, [−½Δ, Op_h(a)] e_k⟩` with `(1/ih)⟨e_j, Op_h(ξ·∂_x a) e_k⟩`
/// over the cube `‖j‖_∞, ‖k‖_∞ ≤ n`.
pub fn commutator_defect(a: &Symbol, h: f64, n: i64) -> CommutatorReport {
    let window = ModeBox::cube(a.dim(), n);
    let t = a.transport();
    let rule = Midpoint::plain();
    let factor = Complex64::new(0.0, -1.0 / h);
    let mut report = CommutatorReport { defect: 0.0, scale: 0.0 };
    for k in window.iter() {
        for (m, terms) in a.mode_terms() {
            let j = &k + m;
            if !window.contains(&j) {
                continue;
            }
            let op = rule.element(a, terms, h, &j, &k);
            let lhs = op * ((j.norm_sq() - k.norm_sq()) as f64 / 2.0);
            let rhs = factor * rule.matrix_element(&t, h, &j, &k);
            report.defect = report.defect.max((lhs - rhs).norm());
            report.scale = report.scale.max(lhs.norm()).max(rhs.norm());
        }
    }
    report
}

/// `⟨a⟩_Λ`: keeps the x-modes lying in `Λ` and tags the result with `Λ`.
pub fn average_symbol(a: &Symbol, module: &PrimitiveModule) -> Result<Symbol> {
    check_dim(a.dim(), module.dim())?;
    Ok(a.restricted(|m| mode_in(m, module).unwrap_or(false), Some(module.clone())))
}
