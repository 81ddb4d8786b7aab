//! Observability constants on a truncated Fourier box: the Gram operator of
//! `u₀ ↦ 1_ω U_V(t) u₀` on `L²([0,T] × T^d)`, its bottom eigenvalue and the
//! constant `C = 1/λ_min`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::dynamics::{simpson_rule, Potential, PropagatorPlan, Scheme, SpectralProfile};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, CMatrix};
use crate::mode::{Mode, ModeBox};
use crate::quantization::FourierState;

/// Below this `λ_min` the constant is reported as infinite.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Config form: each box is a list of `[lo, hi]` arcs in units of `2π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationConfig {
    pub omega: Vec<Vec<[Decimal; 2]>>,
    #[serde(rename = "T")]
    pub horizon: Decimal,
}

impl ObservationConfig {
    pub fn build(&self, dim: usize) -> Result<ObservationSpec> {
        let boxes = self
            .omega
            .iter()
            .map(|b| b.iter().map(|[lo, hi]| (TAU * lo.0, TAU * hi.0)).collect())
            .collect();
        ObservationSpec::new(dim, boxes, self.horizon.0)
    }
}

/// `ω` as a union of disjoint half-open boxes `∏ [lo_a, hi_a)` in `[0, 2π)^d`, and a horizon `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationSpec {
    dim: usize,
    boxes: Vec<Vec<(f64, f64)>>,
    horizon: f64,
}

fn arc_coefficient(m: i64, (lo, hi): (f64, f64)) -> Complex64 {
    if hi - lo >= TAU {
        return if m == 0 { 1.0.into() } else { 0.0.into() };
    }
    if m == 0 {
        return ((hi - lo) / TAU).into();
    }
    let mf = m as f64;
    (Complex64::from_polar(1.0, -mf * lo) - Complex64::from_polar(1.0, -mf * hi)) / Complex64::new(0.0, TAU * mf)
}

impl ObservationSpec {
    pub fn new(dim: usize, boxes: Vec<Vec<(f64, f64)>>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::validation("T", "horizon must be positive"));
        }
        if boxes.is_empty() {
            return Err(Error::validation("omega", "at least one box is required"));
        }
        for (i, b) in boxes.iter().enumerate() {
            check_dim(dim, b.len())?;
            for &(lo, hi) in b {
                if !(0.0 <= lo && lo < hi && hi <= TAU + 1e-12) {
                    return Err(Error::validation(format!("omega[{i}]"), "arcs must satisfy 0 ≤ lo < hi ≤ 1 (units of 2π)"));
                }
            }
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if (0..dim).all(|a| boxes[i][a].0 < boxes[j][a].1 && boxes[j][a].0 < boxes[i][a].1) {
                    return Err(Error::OverlappingObservation { first: i, second: j });
                }
            }
        }
        Ok(ObservationSpec { dim, boxes, horizon })
    }

    pub fn full_torus(dim: usize, horizon: f64) -> Result<Self> {
        Self::new(dim, vec![vec![(0.0, TAU); dim]], horizon)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn boxes(&self) -> &[Vec<(f64, f64)>] {
        &self.boxes
    }

    pub fn measure(&self) -> f64 {
        self.boxes.iter().map(|b| b.iter().map(|(lo, hi)| hi - lo).product::<f64>()).sum()
    }

    /// Fourier-series coefficient `(2π)^{-d} ∫_ω e^{-ik·x} dx = ⟨e_j, 1_ω e_l⟩` for `k = j − l`.
    pub fn indicator_coefficient(&self, k: &Mode) -> Complex64 {
        self.boxes
            .iter()
            .map(|b| k.iter().zip(b).map(|(&m, &arc)| arc_coefficient(m, arc)).product::<Complex64>())
            .sum()
    }

    /// `(1_ω)^(k)` in the orthonormal normalisation: `(2π)^{d/2}` times the series coefficient.
    pub fn indicator_hat(&self, k: &Mode) -> Complex64 {
        self.indicator_coefficient(k) * TAU.powf(self.dim as f64 / 2.0)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| {
            x.iter().zip(b).all(|(&v, &(lo, hi))| {
                let v = v.rem_euclid(TAU);
                lo <= v && v < hi
            })
        })
    }

    /// Multiplication by `1_ω` on the window.
    pub fn mask_matrix(&self, window: &ModeBox) -> CMatrix {
        let modes: Vec<Mode> = window.iter().collect();
        CMatrix::from_fn(modes.len(), modes.len(), |r, c| self.indicator_coefficient(&(&modes[r] - &modes[c])))
    }
}

/// `∫₀^T e^{iδt} dt`, written as `T e^{iδT/2} sinc(δT/2)` to stay accurate at small `δ`.
pub fn phi(horizon: f64, delta: f64) -> Complex64 {
    let x = delta * horizon / 2.0;
    let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
    Complex64::from_polar(horizon * sinc, x)
}

#[derive(Clone, Debug)]
pub struct GramOperator {
    spec: ObservationSpec,
    potential: Potential,
    radius: i64,
    window: ModeBox,
    matrix: CMatrix,
}

impl GramOperator {
    pub fn spec(&self) -> &ObservationSpec {
        &self.spec
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn window(&self) -> &ModeBox {
        &self.window
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `⟨u, G u⟩ = ∫₀^T ‖1_ω U_V(t)u‖² dt` for `u` supported in the window.
    pub fn quadratic_form(&self, u: &FourierState) -> Result<f64> {
        let v = u.to_box_vector(&self.window)?;
        Ok((v.adjoint() * &self.matrix * &v)[(0, 0)].re)
    }
}

fn check_static(v: &Potential) -> Result<()> {
    if v.is_time_dependent() {
        return Err(Error::TimeDependentPotential { operation: "observability" });
    }
    Ok(())
}

fn hermitian_symmetrised(g: CMatrix) -> CMatrix {
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Padding of the propagation window around the data cube: the data live on
/// `‖k‖_∞ ≤ N` but evolve on `‖k‖_∞ ≤ N + pad`.
pub fn propagation_pad(v: &Potential) -> i64 {
    if v.is_zero() {
        0
    } else {
        (GRAM_PAD_PER_MODE * v.mode_radius()).max(GRAM_PAD_PER_MODE)
    }
}

/// Window padding per unit of potential mode radius.
pub const GRAM_PAD_PER_MODE: i64 = 24;

fn restrict(big: &CMatrix, outer: &ModeBox, inner: &ModeBox) -> CMatrix {
    let idx: Vec<usize> = inner.iter().map(|k| outer.index_of(&k).expect("inner box lies in outer box")).collect();
    CMatrix::from_fn(idx.len(), idx.len(), |r, c| big[(idx[r], idx[c])])
}

/// Gram operator on the cube `‖k‖_∞ ≤ N`: closed form for `V = 0`; otherwise
/// assembled in the eigenbasis of `H` on the padded window and restricted.
pub fn gram(spec: &ObservationSpec, v: &Potential, radius: i64) -> Result<GramOperator> {
    check_dim(spec.dim(), v.dim())?;
    check_static(v)?;
    if radius < 0 {
        return Err(Error::validation("N", "box radius must be nonnegative"));
    }
    let window = ModeBox::cube(spec.dim(), radius);
    let modes: Vec<Mode> = window.iter().collect();
    let t = spec.horizon();
    let matrix = if v.is_zero() {
        let rows: Vec<Vec<Complex64>> = modes
            .par_iter()
            .map(|j| {
                modes
                    .iter()
                    .map(|k| {
                        let delta = (j.norm_sq() - k.norm_sq()) as f64 / 2.0;
                        spec.indicator_coefficient(&(j - k)) * phi(t, delta)
                    })
                    .collect()
            })
            .collect();
        CMatrix::from_fn(modes.len(), modes.len(), |r, c| rows[r][c])
    } else {
        let outer = ModeBox::cube(spec.dim(), radius + propagation_pad(v));
        let plan = PropagatorPlan::new(v.clone(), outer.clone(), Scheme::Eigenbasis)?;
        let (values, w) = plan.eigen().ok_or(Error::NoEigenbasis)?;
        let x = w.adjoint() * spec.mask_matrix(&outer) * &w;
        let weighted = CMatrix::from_fn(values.len(), values.len(), |a, b| x[(a, b)] * phi(t, values[a] - values[b]));
        hermitian_symmetrised(restrict(&(&w * weighted * w.adjoint()), &outer, &window))
    };
    Ok(GramOperator { spec: spec.clone(), potential: v.clone(), radius, window, matrix })
}

/// Oracle: composite Simpson in `t` of `U(t)* 1_ω U(t)`, with `U` stepped by
/// `exp(−iH dt)` on the same padded window as [`gram`].
pub fn gram_quadrature(spec: &ObservationSpec, v: &Potential, radius: i64, panels: usize) -> Result<CMatrix> {
    check_dim(spec.dim(), v.dim())?;
    check_static(v)?;
    let window = ModeBox::cube(spec.dim(), radius);
    let outer = ModeBox::cube(spec.dim(), radius + propagation_pad(v));
    let mut ham = CMatrix::zeros(outer.len(), outer.len());
    for (ci, k) in outer.iter().enumerate() {
        ham[(ci, ci)] += Complex64::new(k.norm_sq() as f64 / 2.0, 0.0);
        for (shift, c) in v.iter() {
            if let Some(ri) = outer.index_of(&(&k + shift)) {
                ham[(ri, ci)] += c;
            }
        }
    }
    let (nodes, weights) = simpson_rule(spec.horizon(), panels);
    let dt = nodes[1] - nodes[0];
    let step = (ham * Complex64::new(0.0, -dt)).exp();
    let mask = spec.mask_matrix(&outer);
    // Columns of U(t) for the data modes only.
    let cols: Vec<usize> = window.iter().map(|k| outer.index_of(&k).expect("inner box lies in outer box")).collect();
    let mut u = CMatrix::from_fn(outer.len(), cols.len(), |r, c| if r == cols[c] { 1.0.into() } else { 0.0.into() });
    let mut acc = CMatrix::zeros(cols.len(), cols.len());
    for (i, w) in weights.iter().enumerate() {
        if i > 0 {
            u = &step * u;
        }
        acc += u.adjoint() * &mask * &u * Complex64::new(*w, 0.0);
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityConstant {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `None` when `λ_min ≤` [`LAMBDA_FLOOR`] (observability fails at this truncation).
    pub constant: Option<f64>,
}

impl ObservabilityConstant {
    fn from_eigenvalues(values: &[f64]) -> Self {
        let lambda_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let lambda_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ObservabilityConstant {
            lambda_min,
            lambda_max,
            constant: (lambda_min > LAMBDA_FLOOR).then(|| 1.0 / lambda_min),
        }
    }

    pub fn constant_or_inf(&self) -> f64 {
        self.constant.unwrap_or(f64::INFINITY)
    }
}

pub fn observability_constant(g: &GramOperator) -> ObservabilityConstant {
    ObservabilityConstant::from_eigenvalues(&hermitian_eigenvalues(g.matrix()))
}

/// Minimising eigenvector of the Gram operator, as a state.
pub fn minimizer(g: &GramOperator) -> FourierState {
    let (values, vectors) = hermitian_eigen(g.matrix());
    let i = (0..values.len()).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("nonempty window");
    FourierState::from_box_vector(g.window(), &vectors.column(i).into_owned())
}

/// Constant restricted to the spectral window `{χ(h²λ) > 0}` of the truncated
/// Hamiltonian: the optimal constant on the range of `Π_h = χ(h²H)`.
pub fn spectral_window_constant(
    spec: &ObservationSpec,
    v: &Potential,
    radius: i64,
    h: f64,
    profile: &SpectralProfile,
) -> Result<ObservabilityConstant> {
    let g = gram(spec, v, radius)?;
    let plan = PropagatorPlan::new(v.clone(), g.window().clone(), Scheme::Eigenbasis)?;
    let (values, w) = plan.eigen().ok_or(Error::NoEigenbasis)?;
    let keep: Vec<usize> = (0..values.len()).filter(|&a| profile.eval(h * h * values[a]) > 0.0).collect();
    if keep.is_empty() {
        return Err(Error::validation("h", "the spectral window contains no eigenvalue of the truncated Hamiltonian"));
    }
    let ws = w.select_columns(&keep);
    let reduced = hermitian_symmetrised(ws.adjoint() * g.matrix() * &ws);
    Ok(ObservabilityConstant::from_eigenvalues(&hermitian_eigenvalues(&reduced)))
}

/// `∫₀^T ‖U_V(t)u₀‖²_{L²(ω)} dt / ‖u₀‖²`, on the smallest cube containing `u₀`.
pub fn quotient(u0: &FourierState, spec: &ObservationSpec, v: &Potential) -> Result<f64> {
    let n = u0.norm_sq();
    if n == 0.0 {
        return Err(Error::ZeroState);
    }
    let g = gram(spec, v, u0.radius())?;
    Ok(g.quadratic_form(u0)? / n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberCheck {
    pub index: usize,
    #[serde(rename = "N")]
    pub radius: i64,
    /// `∫₀^T ‖U_V(t)u‖²_{L²(ω)} dt`.
    pub observed: f64,
    pub lambda_min: f64,
    /// `λ_min ‖u‖²`, the bound implied by the truncated constant.
    pub bound: f64,
    pub passes: bool,
    /// `T λ_min ‖u‖²`, the bound read with a factor `T`.
    pub scaled_bound: f64,
    pub passes_scaled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub members: Vec<MemberCheck>,
    pub all_pass: bool,
}

pub const COROLLARY_SLACK: f64 = 1e-8;

/// Checks `∫₀^T mass_ω ≥ ‖u‖²/C_emp − 10⁻⁸` for every member, with `C_emp`
/// taken at the member's own truncation.
pub fn corollary_lower_bound_check(family: &[FourierState], spec: &ObservationSpec, v: &Potential) -> Result<CorollaryReport> {
    let members = family
        .iter()
        .enumerate()
        .map(|(index, u)| {
            if u.norm_sq() == 0.0 {
                return Err(Error::ZeroState);
            }
            let g = gram(spec, v, u.radius())?;
            let lambda_min = observability_constant(&g).lambda_min;
            let observed = g.quadratic_form(u)?;
            let bound = lambda_min * u.norm_sq();
            let scaled_bound = spec.horizon() * bound;
            Ok(MemberCheck {
                index,
                radius: u.radius(),
                observed,
                lambda_min,
                bound,
                passes: observed >= bound - COROLLARY_SLACK,
                scaled_bound,
                passes_scaled: observed >= scaled_bound - COROLLARY_SLACK,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_pass = members.iter().all(|m| m.passes);
    Ok(CorollaryReport { members, all_pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityRow {
    #[serde(rename = "N")]
    pub radius: i64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub omega_id: String,
    pub lambda_min: f64,
    #[serde(rename = "C")]
    pub constant: Option<f64>,
}

/// Columns `N,T,omega-id,lambda_min,C` (`C = inf` past the floor).
pub fn rows_to_csv(rows: &[ObservabilityRow]) -> String {
    let mut s = String::from("N,T,omega-id,lambda_min,C\n");
    for r in rows {
        let c = r.constant.map_or_else(|| "inf".to_string(), |c| c.to_string());
        writeln!(s, "{},{},{},{},{}", r.radius, r.horizon, r.omega_id, r.lambda_min, c).expect("write to string");
    }
    s
}

/// `λ_min` over a sweep of truncations.
pub fn sweep(spec: &ObservationSpec, v: &Potential, radii: &[i64], omega_id: &str) -> Result<Vec<ObservabilityRow>> {
    radii
        .iter()
        .map(|&n| {
            let c = observability_constant(&gram(spec, v, n)?);
            Ok(ObservabilityRow {
                radius: n,
                horizon: spec.horizon(),
                omega_id: omega_id.to_string(),
                lambda_min: c.lambda_min,
                constant: c.constant,
            })
        })
        .collect()
}

/// `(0, π/2)` in `d = 1`.
pub fn quarter_arc(horizon: f64) -> Result<ObservationSpec> {
    ObservationSpec::new(1, vec![vec![(0.0, PI / 2.0)]], horizon)
}
