//! Band-limited phase-space symbols `a(x, ξ, η)`.
//!
//! A symbol is a finite Fourier series in `x`,
//! `a(x, ξ, η) = Σ_m c_m(ξ, η) e^{im·x}`, whose coefficient profiles are sums of
//! products of analytic factors in `ξ` and an `η`-profile that is
//! 0-homogeneous outside the radius `R₀`. The unitarily normalised coefficient
//! `â_m = (2π)^{d/2} c_m` is available through [`Symbol::hat`].

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lattice::{mode_in, PrimitiveModule};
use crate::mode::Mode;

use super::cutoff::{smooth_step, Cutoff};

/// Multivariate real polynomial `Σ c · ξ^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    /// The linear form `v·ξ`.
    pub fn linear(v: &[f64]) -> Self {
        let d = v.len();
        Polynomial {
            terms: (0..d)
                .filter(|&i| v[i] != 0.0)
                .map(|i| {
                    let mut p = vec![0; d];
                    p[i] = 1;
                    (p, v[i])
                })
                .collect(),
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(p, c)| {
                c * p
                    .iter()
                    .zip(xi)
                    .map(|(&e, &x)| x.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

/// One analytic factor of a `ξ`-profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum XiFactor {
    Poly(Polynomial),
    /// `exp(−|ξ − center|² / (2 width²))`.
    Gauss { center: Vec<f64>, width: f64 },
    /// Product over axes of smooth steps rising at `lo` and falling at `hi`,
    /// each transition of width `ramp`.
    IndicatorSmoothed { lo: Vec<f64>, hi: Vec<f64>, ramp: f64 },
    /// `χ(|ξ − center| / radius)`, compactly supported with a smooth square root.
    Bump { center: Vec<f64>, radius: f64 },
    /// `e^{i freq·ξ}`; produced by the geodesic flow.
    Phase { freq: Vec<f64> },
}

impl XiFactor {
    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        let re = |v: f64| Complex64::new(v, 0.0);
        match self {
            XiFactor::Poly(p) => re(p.eval(xi)),
            XiFactor::Gauss { center, width } => {
                let r2: f64 = xi.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
                re((-r2 / (2.0 * width * width)).exp())
            }
            XiFactor::IndicatorSmoothed { lo, hi, ramp } => re(xi
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&x, (&l, &h))| {
                    smooth_step((x - l) / ramp + 0.5) * smooth_step((h - x) / ramp + 0.5)
                })
                .product()),
            XiFactor::Bump { center, radius } => {
                let r2: f64 = xi.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
                re(Cutoff::chi(r2.sqrt() / radius))
            }
            XiFactor::Phase { freq } => {
                let phase: f64 = xi.iter().zip(freq).map(|(a, b)| a * b).sum();
                Complex64::from_polar(1.0, phase)
            }
        }
    }
}

/// Dependence on the two-microlocal variable `η ∈ ⟨Λ⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EtaProfile {
    Const,
    /// `(dir·η/|η|)²` for `|η| ≥ R₀`, blended smoothly into `inner` on `|η| ≤ R₀/2`.
    Angular { dir: Vec<f64>, inner: f64 },
}

impl EtaProfile {
    pub fn eval(&self, eta: &[f64], r0: f64) -> f64 {
        match self {
            EtaProfile::Const => 1.0,
            EtaProfile::Angular { dir, inner } => {
                let n = eta.iter().map(|e| e * e).sum::<f64>().sqrt();
                if n == 0.0 {
                    return *inner;
                }
                let cos: f64 = eta.iter().zip(dir).map(|(e, d)| e * d).sum::<f64>() / n;
                let s = if r0 > 0.0 { smooth_step(2.0 * n / r0 - 1.0) } else { 1.0 };
                (1.0 - s) * inner + s * cos * cos
            }
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, EtaProfile::Const)
    }
}

/// `coeff · Π factors(ξ) · eta(η)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolTerm {
    pub coeff: Complex64,
    pub xi: Vec<XiFactor>,
    pub eta: EtaProfile,
}

impl SymbolTerm {
    pub fn constant(coeff: Complex64) -> Self {
        SymbolTerm { coeff, xi: Vec::new(), eta: EtaProfile::Const }
    }

    fn eval(&self, xi: &[f64], eta: &[f64], r0: f64) -> Complex64 {
        let mut v = self.coeff;
        for f in &self.xi {
            v *= f.eval(xi);
        }
        if !self.eta.is_const() {
            v *= self.eta.eval(eta, r0);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    dim: usize,
    modes: BTreeMap<Mode, Vec<SymbolTerm>>,
    r0: f64,
    module: Option<PrimitiveModule>,
}

impl Symbol {
    pub fn zero(dim: usize) -> Self {
        Symbol { dim, modes: BTreeMap::new(), r0: 0.0, module: None }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut s = Self::zero(dim);
        s.push(Mode::zero(dim), SymbolTerm::constant(c.into()));
        s
    }

    /// `e^{im·x}`.
    pub fn plane(m: Mode) -> Self {
        let mut s = Self::zero(m.dim());
        s.push(m, SymbolTerm::constant(1.0.into()));
        s
    }

    /// `amplitude · cos(m·x)`.
    pub fn cosine(m: Mode, amplitude: f64) -> Self {
        let mut s = Self::zero(m.dim());
        if m.is_zero() {
            s.push(m, SymbolTerm::constant(amplitude.into()));
        } else {
            let half = Complex64::new(amplitude / 2.0, 0.0);
            s.push(-&m, SymbolTerm::constant(half));
            s.push(m, SymbolTerm::constant(half));
        }
        s
    }

    /// `amplitude · sin(m·x)`.
    pub fn sine(m: Mode, amplitude: f64) -> Self {
        let mut s = Self::zero(m.dim());
        if !m.is_zero() {
            let c = Complex64::new(0.0, -amplitude / 2.0);
            s.push(-&m, SymbolTerm::constant(-c));
            s.push(m, SymbolTerm::constant(c));
        }
        s
    }

    /// A function of `ξ` alone.
    pub fn xi_only(dim: usize, factors: Vec<XiFactor>) -> Self {
        let mut s = Self::zero(dim);
        s.push(
            Mode::zero(dim),
            SymbolTerm { coeff: 1.0.into(), xi: factors, eta: EtaProfile::Const },
        );
        s
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Mode, SymbolTerm)>) -> Result<Self> {
        let mut s = Self::zero(dim);
        for (m, t) in terms {
            check_dim(dim, m.dim())?;
            s.push(m, t);
        }
        Ok(s)
    }

    fn push(&mut self, m: Mode, t: SymbolTerm) {
        self.modes.entry(m).or_default().push(t);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn module(&self) -> Option<&PrimitiveModule> {
        self.module.as_ref()
    }

    pub fn modes(&self) -> impl Iterator<Item = &Mode> {
        self.modes.keys()
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn has_mode(&self, m: &Mode) -> bool {
        self.modes.contains_key(m)
    }

    /// `max ‖m‖_∞` over the x-modes.
    pub fn mode_radius(&self) -> i64 {
        self.modes.keys().map(Mode::sup_norm).max().unwrap_or(0)
    }

    pub fn has_eta_dependence(&self) -> bool {
        self.modes.values().flatten().any(|t| !t.eta.is_const())
    }

    /// Tags the symbol with `Λ`; every x-mode must lie in `Λ`.
    pub fn with_module(mut self, module: PrimitiveModule) -> Result<Self> {
        check_dim(self.dim, module.dim())?;
        for m in self.modes.keys() {
            if !mode_in(m, &module)? {
                return Err(Error::ModeOutsideModule { mode: m.to_vec() });
            }
        }
        self.module = Some(module);
        Ok(self)
    }

    /// Applies the same `η`-profile (homogeneous beyond `r0`) to every term.
    pub fn with_eta(mut self, eta: EtaProfile, r0: f64) -> Self {
        for t in self.modes.values_mut().flatten() {
            t.eta = eta.clone();
        }
        self.r0 = r0;
        self
    }

    /// Multiplies every term by a `ξ`-factor.
    pub fn times_xi(mut self, factor: XiFactor) -> Self {
        for t in self.modes.values_mut().flatten() {
            t.xi.push(factor.clone());
        }
        self
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        for t in self.modes.values_mut().flatten() {
            t.coeff *= s;
        }
        self
    }

    /// Sum of two symbols; the module tag survives only if both agree.
    pub fn plus(&self, other: &Symbol) -> Symbol {
        let mut out = self.clone();
        for (m, ts) in &other.modes {
            for t in ts {
                out.push(m.clone(), t.clone());
            }
        }
        out.r0 = self.r0.max(other.r0);
        if self.module != other.module {
            out.module = None;
        }
        out
    }

    /// Fourier-series coefficient `c_m(ξ, η)`.
    pub fn coefficient(&self, m: &Mode, xi: &[f64], eta: &[f64]) -> Complex64 {
        match self.modes.get(m) {
            Some(ts) => self.eval_terms(ts, xi, eta),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub(crate) fn eval_terms(&self, ts: &[SymbolTerm], xi: &[f64], eta: &[f64]) -> Complex64 {
        ts.iter().map(|t| t.eval(xi, eta, self.r0)).sum()
    }

    /// Keeps the x-modes satisfying `keep` and replaces the module tag.
    pub(crate) fn restricted(&self, mut keep: impl FnMut(&Mode) -> bool, module: Option<PrimitiveModule>) -> Symbol {
        Symbol {
            modes: self
                .modes
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, t)| (m.clone(), t.clone()))
                .collect(),
            module,
            ..self.clone()
        }
    }

    pub(crate) fn mode_terms(&self) -> impl Iterator<Item = (&Mode, &[SymbolTerm])> {
        self.modes.iter().map(|(m, t)| (m, t.as_slice()))
    }

    /// `â_m(ξ, η) = ∫ a e^{-im·x} (2π)^{-d/2} dx = (2π)^{d/2} c_m`.
    pub fn hat(&self, m: &Mode, xi: &[f64], eta: &[f64]) -> Complex64 {
        self.coefficient(m, xi, eta) * TAU.powf(self.dim as f64 / 2.0)
    }

    /// Point value `a(x, ξ, η)`.
    pub fn value(&self, x: &[f64], xi: &[f64], eta: &[f64]) -> Complex64 {
        self.modes
            .iter()
            .map(|(m, ts)| self.eval_terms(ts, xi, eta) * Complex64::from_polar(1.0, m.dot_f64(x)))
            .sum()
    }

    /// `ξ·∂_x a`, built analytically: mode `m` gains the factor `i (m·ξ)`.
    pub fn transport(&self) -> Symbol {
        let mut out = Symbol { modes: BTreeMap::new(), ..self.clone() };
        for (m, ts) in &self.modes {
            if m.is_zero() {
                continue;
            }
            let lin = XiFactor::Poly(Polynomial::linear(&m.to_f64()));
            for t in ts {
                let mut t = t.clone();
                t.coeff *= Complex64::i();
                t.xi.push(lin.clone());
                out.push(m.clone(), t);
            }
        }
        out
    }

    /// `a ∘ φ_τ` with `φ_τ(x, ξ) = (x + τξ, ξ)`: mode `m` gains `e^{iτ m·ξ}`.
    pub fn flow(&self, tau: f64) -> Symbol {
        let mut out = Symbol { modes: BTreeMap::new(), ..self.clone() };
        for (m, ts) in &self.modes {
            for t in ts {
                let mut t = t.clone();
                if !m.is_zero() {
                    t.xi.push(XiFactor::Phase {
                        freq: m.iter().map(|&c| tau * c as f64).collect(),
                    });
                }
                out.push(m.clone(), t);
            }
        }
        out
    }

    /// Largest `|c_{-m} − conj(c_m)|` over the sample points; zero for real symbols.
    pub fn hermiticity_defect(&self, samples: &[(Vec<f64>, Vec<f64>)]) -> f64 {
        let mut worst: f64 = 0.0;
        for m in self.modes.keys() {
            let neg = -m;
            for (xi, eta) in samples {
                let a = self.coefficient(m, xi, eta);
                let b = self.coefficient(&neg, xi, eta);
                worst = worst.max((b - a.conj()).norm());
            }
        }
        worst
    }

    /// `max_m sup_ξ |c_m(ξ, η)|` over the sample points.
    pub fn coefficient_sup(&self, samples: &[(Vec<f64>, Vec<f64>)]) -> f64 {
        self.modes
            .keys()
            .flat_map(|m| samples.iter().map(move |(xi, eta)| self.coefficient(m, xi, eta).norm()))
            .fold(0.0, f64::max)
    }

    /// Sampled Calderón–Vaillancourt seminorm `Σ_{|α| ≤ order} sup |∂^α a|`
    /// over `(x, ξ)` (η frozen at 0). `x`-derivatives are exact; `ξ`-derivatives
    /// use central differences with step `1e-3`.
    pub fn cv_seminorm(&self, order: usize, xi_range: f64, xi_points: usize, x_points: usize) -> f64 {
        let d = self.dim;
        let eta = vec![0.0; d];
        let step = 1e-3;
        let multi = multi_indices(2 * d, order);
        let xi_grid = tensor_grid(d, xi_points, -xi_range, xi_range);
        let x_grid = tensor_grid(d, x_points, 0.0, TAU * (1.0 - 1.0 / x_points as f64));
        let mut total = 0.0;
        for alpha in &multi {
            let (ax, axi) = alpha.split_at(d);
            let mut sup: f64 = 0.0;
            for xi in &xi_grid {
                let coeffs: Vec<(Complex64, &Mode)> = self
                    .modes
                    .keys()
                    .map(|m| {
                        let mut dm = Complex64::new(1.0, 0.0);
                        for (i, &p) in ax.iter().enumerate() {
                            dm *= (Complex64::i() * m[i] as f64).powu(p as u32);
                        }
                        (dm * fd_derivative(|z| self.coefficient(m, z, &eta), xi, axi, step), m)
                    })
                    .collect();
                for x in &x_grid {
                    let v: Complex64 = coeffs
                        .iter()
                        .map(|(c, m)| c * Complex64::from_polar(1.0, m.dot_f64(x)))
                        .sum();
                    sup = sup.max(v.norm());
                }
            }
            total += sup;
        }
        total
    }
}

fn multi_indices(n: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; n]];
    for _ in 0..order {
        let mut next = Vec::new();
        for a in &out {
            for i in 0..n {
                let mut b = a.clone();
                b[i] += 1;
                next.push(b);
            }
        }
        out.extend(next);
        out.sort();
        out.dedup();
    }
    out
}

fn tensor_grid(d: usize, n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..n)
        .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();
    let mut pts = vec![Vec::new()];
    for _ in 0..d {
        pts = pts
            .into_iter()
            .flat_map(|p| axis.iter().map(move |&v| {
                let mut q = p.clone();
                q.push(v);
                q
            }))
            .collect();
    }
    pts
}

fn fd_derivative(f: impl Fn(&[f64]) -> Complex64 + Copy, at: &[f64], orders: &[usize], step: f64) -> Complex64 {
    match orders.iter().position(|&o| o > 0) {
        None => f(at),
        Some(i) => {
            let mut lower = orders.to_vec();
            lower[i] -= 1;
            let mut plus = at.to_vec();
            let mut minus = at.to_vec();
            plus[i] += step;
            minus[i] -= step;
            (fd_derivative(f, &plus, &lower, step) - fd_derivative(f, &minus, &lower, step))
                / (2.0 * step)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(d: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..5)
            .map(|i| (vec![0.3 * i as f64 - 0.6; d], vec![i as f64; d]))
            .collect()
    }

    #[test]
    fn cosine_is_real_valued() {
        let a = Symbol::cosine(Mode::from([1, 2]), 3.0)
            .plus(&Symbol::sine(Mode::from([0, 1]), 1.5))
            .times_xi(XiFactor::Gauss { center: vec![0.0, 0.0], width: 1.0 });
        assert!(a.hermiticity_defect(&samples(2)) < 1e-15);
        let v = a.value(&[0.4, 1.3], &[0.2, -0.1], &[0.0, 0.0]);
        let g = (-(0.04 + 0.01) / 2.0f64).exp();
        let expect = g * (3.0 * (0.4f64 + 2.6).cos() + 1.5 * 1.3f64.sin());
        assert!((v.re - expect).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn hat_normalisation_of_plane_wave() {
        let a = Symbol::plane(Mode::from([1, 0]));
        let h = a.hat(&Mode::from([1, 0]), &[0.0, 0.0], &[0.0, 0.0]);
        assert!((h.re - TAU).abs() < 1e-12);
    }

    #[test]
    fn transport_matches_finite_difference() {
        let a = Symbol::cosine(Mode::from([2, -1]), 1.0)
            .times_xi(XiFactor::Poly(Polynomial { terms: vec![(vec![1, 1], 1.0)] }));
        let t = a.transport();
        let (x, xi) = ([0.7, 0.2], [0.5, -1.5]);
        let eps = 1e-6;
        let mut fd = 0.0;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += eps;
            xm[i] -= eps;
            fd += xi[i] * (a.value(&xp, &xi, &[0.0; 2]) - a.value(&xm, &xi, &[0.0; 2])).re / (2.0 * eps);
        }
        assert!((t.value(&x, &xi, &[0.0; 2]).re - fd).abs() < 1e-6);
    }

    #[test]
    fn flow_shifts_x() {
        let a = Symbol::cosine(Mode::from([1]), 1.0);
        let f = a.flow(0.8);
        let v = f.value(&[0.1], &[0.5], &[0.0]);
        assert!((v.re - (0.1f64 + 0.4).cos()).abs() < 1e-14);
    }

    #[test]
    fn angular_eta_is_homogeneous_outside_r0() {
        let p = EtaProfile::Angular { dir: vec![1.0, 0.0], inner: 0.5 };
        let a = p.eval(&[3.0, 4.0], 2.0);
        let b = p.eval(&[30.0, 40.0], 2.0);
        assert!((a - 0.36).abs() < 1e-14 && (a - b).abs() < 1e-14);
        assert_eq!(p.eval(&[0.1, 0.0], 2.0), 0.5);
    }

    #[test]
    fn module_tag_rejects_foreign_modes() {
        let lam = crate::lattice::saturate(2, &[Mode::from([0, 1])]).unwrap();
        assert!(Symbol::cosine(Mode::from([1, 0]), 1.0).with_module(lam.clone()).is_err());
        assert!(Symbol::cosine(Mode::from([0, 3]), 1.0).with_module(lam).is_ok());
    }
}
