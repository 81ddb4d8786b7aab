//! Unitary propagation `u(t) = e^{-itH} u₀` with `H = −½Δ + V`.
//!
//! A plan acts on integer index vectors `n ∈ Z^q` with kinetic energy
//! `½ nᵀQn`. For ambient plans `q = d`, `Q = I` and `n = k`. For averaged
//! plans on `T_Λ`, `n = Bᵀk` for the canonical basis `B` of `Λ`,
//! `Q = (BᵀB)⁻¹` (so `½ nᵀQn = ½|P_Λk|²`) and a potential mode `v ∈ Λ`
//! shifts `n` by `Bᵀv`.

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::fft::{Grid, GridFft};
use crate::lattice::{geometry, PrimitiveModule};
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::mode::{Mode, ModeBox};
use crate::quantization::FourierState;

use super::potential::Potential;

pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scheme {
    ExactFree,
    Eigenbasis,
    SplitStep { dt: f64 },
}

#[derive(Clone)]
enum Engine {
    Diagonal { energies: Vec<f64> },
    Eigen { values: Vec<f64>, vectors: CMatrix },
    Split(Box<SplitEngine>),
}

#[derive(Clone)]
struct SplitEngine {
    fft: GridFft,
    dt: f64,
    /// Representative index for each grid slot.
    slot_index: Vec<Mode>,
    kinetic: Vec<f64>,
    static_part: Vec<f64>,
    modulated_part: Vec<f64>,
}

/// An immutable propagator for a fixed potential on a fixed index box.
#[derive(Clone)]
pub struct PropagatorPlan {
    potential: Potential,
    window: ModeBox,
    quad: Vec<Vec<f64>>,
    /// `(index shift, ambient potential mode)`.
    shifts: Vec<(Mode, Mode)>,
    module: Option<PrimitiveModule>,
    scheme: Scheme,
    engine: Engine,
}

fn kinetic(quad: &[Vec<f64>], n: &Mode) -> f64 {
    let mut acc = 0.0;
    for i in 0..n.dim() {
        for j in 0..n.dim() {
            acc += n[i] as f64 * quad[i][j] * n[j] as f64;
        }
    }
    acc / 2.0
}

fn identity(q: usize) -> Vec<Vec<f64>> {
    (0..q).map(|i| (0..q).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

impl PropagatorPlan {
    /// Plan on the ambient torus over `window`.
    pub fn new(potential: Potential, window: ModeBox, scheme: Scheme) -> Result<Self> {
        check_dim(potential.dim(), window.dim())?;
        let shifts = potential.iter().map(|(k, _)| (k.clone(), k.clone())).collect();
        let quad = identity(window.dim());
        Self::build(potential, window, quad, shifts, None, scheme)
    }

    /// Default scheme: exact-free for constant `V`, eigenbasis for static `V`,
    /// split-step otherwise.
    pub fn auto(potential: Potential, window: ModeBox) -> Result<Self> {
        let scheme = if potential.is_time_dependent() {
            Scheme::SplitStep { dt: DEFAULT_DT }
        } else if potential.iter().all(|(k, _)| k.is_zero()) {
            Scheme::ExactFree
        } else {
            Scheme::Eigenbasis
        };
        Self::new(potential, window, scheme)
    }

    fn build(
        potential: Potential,
        window: ModeBox,
        quad: Vec<Vec<f64>>,
        shifts: Vec<(Mode, Mode)>,
        module: Option<PrimitiveModule>,
        scheme: Scheme,
    ) -> Result<Self> {
        let mut plan = PropagatorPlan {
            potential,
            window,
            quad,
            shifts,
            module,
            scheme,
            engine: Engine::Diagonal { energies: Vec::new() },
        };
        plan.engine = match scheme {
            Scheme::ExactFree => {
                if plan.shifts.iter().any(|(s, _)| !s.is_zero()) || plan.potential.is_time_dependent() {
                    return Err(Error::validation("scheme", "exact-free requires a constant potential"));
                }
                let v0 = plan.potential.coefficient(&Mode::zero(plan.potential.dim())).re;
                Engine::Diagonal {
                    energies: plan.window.iter().map(|n| kinetic(&plan.quad, &n) + v0).collect(),
                }
            }
            Scheme::Eigenbasis => {
                if plan.potential.is_time_dependent() {
                    return Err(Error::TimeDependentPotential { operation: "eigenbasis propagation" });
                }
                let (values, vectors) = hermitian_eigen(&plan.hamiltonian_at(0.0));
                Engine::Eigen { values, vectors }
            }
            Scheme::SplitStep { dt } => {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(Error::validation("scheme.dt", "time step must be positive"));
                }
                Engine::Split(Box::new(plan.split_engine(dt)))
            }
        };
        Ok(plan)
    }

    fn split_engine(&self, dt: f64) -> SplitEngine {
        let q = self.window.dim();
        let shape: Vec<usize> = (0..q)
            .map(|a| {
                let reach = self.shifts.iter().map(|(s, _)| s[a].abs()).max().unwrap_or(0) as usize;
                (2 * self.window.extent(a) + 2 * reach).next_power_of_two().max(2)
            })
            .collect();
        let grid = Grid::new(shape.clone());
        let center: Vec<i64> = (0..q).map(|a| (self.window.lo()[a] + self.window.hi()[a]).div_euclid(2)).collect();
        let mut slot_index = vec![Mode::zero(q); grid.len()];
        for (s, slot) in slot_index.iter_mut().enumerate() {
            let rep = grid.slot_mode(s);
            let n: Vec<i64> = (0..q)
                .map(|a| {
                    let m = shape[a] as i64;
                    let off = (rep[a] - center[a]).rem_euclid(m);
                    let off = if off >= (m + 1) / 2 { off - m } else { off };
                    center[a] + off
                })
                .collect();
            *slot = Mode::from(n);
        }
        let kinetic_values = slot_index.iter().map(|n| kinetic(&self.quad, n)).collect();
        let mut static_part = vec![0.0; grid.len()];
        let mut modulated_part = vec![0.0; grid.len()];
        for idx in 0..grid.len() {
            let y = grid.point(idx);
            for (shift, v) in &self.shifts {
                let c = self.potential.coefficient(v);
                let val = (c * Complex64::from_polar(1.0, shift.dot_f64(&y))).re;
                if v.is_zero() || self.potential.modulation().is_none() {
                    static_part[idx] += val;
                } else {
                    modulated_part[idx] += val;
                }
            }
        }
        SplitEngine {
            fft: GridFft::new(grid),
            dt,
            slot_index,
            kinetic: kinetic_values,
            static_part,
            modulated_part,
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn window(&self) -> &ModeBox {
        &self.window
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// `Some(Λ)` for plans built by [`averaged_propagator`].
    pub fn module(&self) -> Option<&PrimitiveModule> {
        self.module.as_ref()
    }

    pub fn kinetic_energy(&self, n: &Mode) -> f64 {
        kinetic(&self.quad, n)
    }

    /// Truncated Hamiltonian on the window at time `t`.
    pub fn hamiltonian_at(&self, t: f64) -> CMatrix {
        let len = self.window.len();
        let mut h = CMatrix::zeros(len, len);
        for (ci, n) in self.window.iter().enumerate() {
            h[(ci, ci)] += Complex64::new(kinetic(&self.quad, &n), 0.0);
            for (shift, v) in &self.shifts {
                if let Some(ri) = self.window.index_of(&(&n + shift)) {
                    h[(ri, ci)] += self.potential.coefficient_at(v, t);
                }
            }
        }
        h
    }

    /// Eigenvalues and eigenvectors (columns), when the plan has them.
    pub fn eigen(&self) -> Option<(Vec<f64>, CMatrix)> {
        match &self.engine {
            Engine::Diagonal { energies } => {
                let n = energies.len();
                Some((energies.clone(), CMatrix::identity(n, n)))
            }
            Engine::Eigen { values, vectors } => Some((values.clone(), vectors.clone())),
            Engine::Split(_) => None,
        }
    }

    fn to_vector(&self, u: &FourierState) -> Result<CVector> {
        check_dim(self.window.dim(), u.dim())?;
        u.to_box_vector(&self.window)
    }

    /// Coordinates of `u` in the plan's eigenbasis.
    pub(crate) fn eigen_coordinates(&self, u: &FourierState) -> Result<CVector> {
        let v = self.to_vector(u)?;
        match &self.engine {
            Engine::Diagonal { .. } => Ok(v),
            Engine::Eigen { vectors, .. } => Ok(vectors.adjoint() * v),
            Engine::Split(_) => Err(Error::NoEigenbasis),
        }
    }

    /// Window vector of the state with eigen-coordinates `c` evolved by `t`.
    pub(crate) fn evolve_coordinates(&self, c: &CVector, t: f64) -> CVector {
        let phase = |e: f64| Complex64::from_polar(1.0, -e * t);
        match &self.engine {
            Engine::Diagonal { energies } => {
                CVector::from_iterator(c.len(), c.iter().zip(energies).map(|(x, &e)| x * phase(e)))
            }
            Engine::Eigen { values, vectors } => {
                let rotated = CVector::from_iterator(c.len(), c.iter().zip(values).map(|(x, &e)| x * phase(e)));
                vectors * rotated
            }
            Engine::Split(_) => unreachable!("split-step plans have no eigen coordinates"),
        }
    }

    /// `U(t₁, t₀) u`; for static potentials only `t₁ − t₀` matters.
    pub fn propagate_between(&self, u: &FourierState, t0: f64, t1: f64) -> Result<FourierState> {
        match &self.engine {
            Engine::Split(engine) => self.split_propagate(engine, u, t0, t1),
            _ => {
                let c = self.eigen_coordinates(u)?;
                Ok(FourierState::from_box_vector(&self.window, &self.evolve_coordinates(&c, t1 - t0)))
            }
        }
    }

    /// States at each of `times` (ascending for time-dependent plans), starting from `u0` at 0.
    pub fn trajectory(&self, u0: &FourierState, times: &[f64]) -> Result<Vec<FourierState>> {
        match &self.engine {
            Engine::Split(_) => {
                let mut out = Vec::with_capacity(times.len());
                let (mut t, mut u) = (0.0, u0.clone());
                for &s in times {
                    u = self.propagate_between(&u, t, s)?;
                    t = s;
                    out.push(u.clone());
                }
                Ok(out)
            }
            _ => {
                let c = self.eigen_coordinates(u0)?;
                Ok(times
                    .iter()
                    .map(|&t| FourierState::from_box_vector(&self.window, &self.evolve_coordinates(&c, t)))
                    .collect())
            }
        }
    }

    /// Calls `f(i, v)` with the window vector of `u(times[i])`, in order.
    pub(crate) fn for_each_vector(
        &self,
        u0: &FourierState,
        times: &[f64],
        mut f: impl FnMut(usize, &CVector) -> Result<()>,
    ) -> Result<()> {
        match self.eigen_coordinates(u0) {
            Ok(c) => {
                for (i, &t) in times.iter().enumerate() {
                    f(i, &self.evolve_coordinates(&c, t))?;
                }
                Ok(())
            }
            Err(Error::NoEigenbasis) => {
                let (mut t, mut u) = (0.0, u0.clone());
                for (i, &s) in times.iter().enumerate() {
                    u = self.propagate_between(&u, t, s)?;
                    t = s;
                    f(i, &u.to_box_vector(&self.window)?)?;
                }
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    /// Largest mass on the outer shell of the window over the given times;
    /// a truncation diagnostic for eigenbasis plans.
    pub fn boundary_mass(&self, u0: &FourierState, times: &[f64]) -> Result<f64> {
        let shell: Vec<usize> = self
            .window
            .iter()
            .enumerate()
            .filter(|(_, n)| (0..n.dim()).any(|a| n[a] == self.window.lo()[a] || n[a] == self.window.hi()[a]))
            .map(|(i, _)| i)
            .collect();
        let mut worst: f64 = 0.0;
        self.for_each_vector(u0, times, |_, v| {
            worst = worst.max(shell.iter().map(|&i| v[i].norm_sqr()).sum());
            Ok(())
        })?;
        Ok(worst)
    }

    fn split_propagate(&self, e: &SplitEngine, u: &FourierState, t0: f64, t1: f64) -> Result<FourierState> {
        check_dim(self.window.dim(), u.dim())?;
        let grid = e.fft.grid();
        let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (n, c) in u.iter() {
            if !self.window.contains(n) {
                return Err(Error::BoxEscape { mode: n.to_vec() });
            }
            data[grid.slot(n)] = *c;
        }
        let span = t1 - t0;
        let steps = ((span.abs() / e.dt) - 1e-9).ceil().max(0.0) as usize;
        if steps > 0 {
            let dt = span / steps as f64;
            let half: Vec<Complex64> = e.kinetic.iter().map(|&k| Complex64::from_polar(1.0, -k * dt / 2.0)).collect();
            let scale = 1.0 / grid.len() as f64;
            let modulation = self.potential.modulation().copied();
            for s in 0..steps {
                let tm = t0 + (s as f64 + 0.5) * dt;
                let f = modulation.map_or(1.0, |m| m.factor(tm));
                for (x, h) in data.iter_mut().zip(&half) {
                    *x *= h;
                }
                e.fft.process(&mut data, FftDirection::Inverse);
                for (i, x) in data.iter_mut().enumerate() {
                    let w = e.static_part[i] + f * e.modulated_part[i];
                    *x *= Complex64::from_polar(scale, -w * dt);
                }
                e.fft.process(&mut data, FftDirection::Forward);
                for (x, h) in data.iter_mut().zip(&half) {
                    *x *= h;
                }
            }
        }
        let mut out = FourierState::zero(u.dim());
        let mut leaked = 0.0;
        let mut worst: Option<(f64, usize)> = None;
        for (slot, c) in data.iter().enumerate() {
            let n = &e.slot_index[slot];
            if self.window.contains(n) {
                out.set(n.clone(), *c);
            } else {
                leaked += c.norm_sqr();
                if worst.is_none_or(|(w, _)| c.norm_sqr() > w) {
                    worst = Some((c.norm_sqr(), slot));
                }
            }
        }
        if leaked > 1e-14 * (1.0 + u.norm_sq()) {
            let slot = worst.map(|(_, s)| s).unwrap_or(0);
            return Err(Error::BoxEscape { mode: e.slot_index[slot].to_vec() });
        }
        Ok(out)
    }
}

/// `e^{-it|k|²/2}` applied to every coefficient.
pub fn free_propagate(u: &FourierState, t: f64) -> FourierState {
    FourierState::from_modes(
        u.dim(),
        u.iter().map(|(k, c)| (k.clone(), c * Complex64::from_polar(1.0, -t * k.norm_sq() as f64 / 2.0))),
    )
    .expect("same dimension")
}

/// `U(t) u₀`; refuses states with support outside the plan window.
pub fn propagate(plan: &PropagatorPlan, u0: &FourierState, t: f64) -> Result<FourierState> {
    plan.propagate_between(u0, 0.0, t)
}

/// Propagator of `−½Δ_Λ + ⟨V⟩_Λ` on `T_Λ`, acting on states indexed by `n = Bᵀk`
/// inside `window ⊂ Z^r`. A rank-0 module gives the one-mode phase evolution.
pub fn averaged_propagator(module: &PrimitiveModule, potential: &Potential, window: ModeBox) -> Result<PropagatorPlan> {
    check_dim(module.dim(), potential.dim())?;
    check_dim(module.rank(), window.dim())?;
    let avg = potential.averaged(module)?;
    let geo = geometry(module);
    let quad: Vec<Vec<f64>> = geo
        .gram_inverse()
        .iter()
        .map(|row| row.iter().map(|x| num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)).collect())
        .collect();
    let shifts = avg.iter().map(|(v, _)| (module.pair_with_basis(v), v.clone())).collect();
    let scheme = if avg.is_time_dependent() {
        Scheme::SplitStep { dt: DEFAULT_DT }
    } else {
        Scheme::Eigenbasis
    };
    PropagatorPlan::build(avg, window, quad, shifts, Some(module.clone()), scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::saturate;

    #[test]
    fn eigenbasis_matches_free_and_gauge() {
        let u = FourierState::from_modes(
            1,
            [(Mode::from([1]), Complex64::new(0.6, 0.0)), (Mode::from([-2]), Complex64::new(0.0, 0.8))],
        )
        .unwrap();
        let w = ModeBox::cube(1, 6);
        let free = PropagatorPlan::new(Potential::zero(1), w.clone(), Scheme::Eigenbasis).unwrap();
        let t = 1.3;
        assert!(propagate(&free, &u, t).unwrap().distance(&free_propagate(&u, t)) < 1e-12);
        let shifted = PropagatorPlan::new(Potential::constant(1, 0.7), w, Scheme::ExactFree).unwrap();
        let expect = free_propagate(&u, t).scaled(Complex64::from_polar(1.0, -0.7 * t));
        assert!(propagate(&shifted, &u, t).unwrap().distance(&expect) < 1e-12);
    }

    #[test]
    fn split_step_agrees_with_eigenbasis() {
        let v = Potential::cosine(Mode::from([1]), 2.0);
        let w = ModeBox::cube(1, 16);
        let u0 = FourierState::plane_wave(Mode::from([0]));
        let eig = PropagatorPlan::new(v.clone(), w.clone(), Scheme::Eigenbasis).unwrap();
        let split = PropagatorPlan::new(v, w, Scheme::SplitStep { dt: 1e-3 }).unwrap();
        let a = propagate(&eig, &u0, 1.0).unwrap();
        let b = propagate(&split, &u0, 1.0).unwrap();
        assert!(a.distance(&b) < 1e-6, "{}", a.distance(&b));
        assert!((b.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn escape_is_refused() {
        let plan = PropagatorPlan::new(Potential::zero(1), ModeBox::cube(1, 2), Scheme::ExactFree).unwrap();
        let u = FourierState::plane_wave(Mode::from([3]));
        assert!(matches!(propagate(&plan, &u, 1.0), Err(Error::BoxEscape { .. })));
        let v = Potential::cosine(Mode::from([1]), 5.0);
        let split = PropagatorPlan::new(v, ModeBox::cube(1, 1), Scheme::SplitStep { dt: 1e-2 }).unwrap();
        let u = FourierState::plane_wave(Mode::from([1]));
        assert!(matches!(propagate(&split, &u, 2.0), Err(Error::BoxEscape { .. })));
    }

    #[test]
    fn averaged_plans() {
        let v = Potential::cosine(Mode::from([1, 0]), 2.0).plus(&Potential::cosine(Mode::from([0, 1]), 3.0));
        let lam = saturate(2, &[Mode::from([1, 0])]).unwrap();
        let plan = averaged_propagator(&lam, &v, ModeBox::cube(1, 5)).unwrap();
        assert_eq!(plan.potential(), &Potential::cosine(Mode::from([1, 0]), 2.0));
        let full = PrimitiveModule::full(2);
        let w = ModeBox::cube(2, 3);
        let a = averaged_propagator(&full, &v, w.clone()).unwrap();
        let b = PropagatorPlan::new(v.clone(), w, Scheme::Eigenbasis).unwrap();
        assert_eq!(a.hamiltonian_at(0.0), b.hamiltonian_at(0.0));
        let zero = averaged_propagator(&PrimitiveModule::zero(2), &v.plus(&Potential::constant(2, 0.5)), ModeBox::cube(0, 0)).unwrap();
        let u = FourierState::plane_wave(Mode::zero(0));
        let out = propagate(&zero, &u, 2.0).unwrap();
        assert!((out.get(&Mode::zero(0)) - Complex64::from_polar(1.0, -1.0)).norm() < 1e-14);
    }
}
