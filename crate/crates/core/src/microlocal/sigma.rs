//! The finite-`h` proxy for `σ_Λ` and the trace formula for `ν_Λ`.
//!
//! Λ-side modes `m = P_Λk` are keyed by `n = Bᵀk ∈ Z^r`, which determines `m`
//! (`m = B(BᵀB)⁻¹n`); the `Λ^⊥` part `σ` is keyed by `Cᵀk` for the complement
//! basis `C`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{check_dim, Error, Result};
use crate::lattice::{format_rational, geometry, mode_in, PrimitiveModule, RationalVector};
use crate::linalg::{hermitian_eigenvalues, trace, CMatrix};
use crate::mode::Mode;
use crate::quantization::{Cutoff, FourierState, Symbol};
use crate::dynamics::PropagatorPlan;

#[derive(Clone, Debug)]
pub struct SigmaProxy {
    module: PrimitiveModule,
    h: f64,
    scale: f64,
    /// Index set `n = Bᵀk`, ascending.
    modes: Vec<Mode>,
    /// Exact `m = P_Λk` for each index.
    lambda_modes: Vec<RationalVector>,
    matrix: CMatrix,
}

impl SigmaProxy {
    pub fn module(&self) -> &PrimitiveModule {
        &self.module
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn lambda_modes(&self) -> &[RationalVector] {
        &self.lambda_modes
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix).first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self, tol: f64) -> usize {
        hermitian_eigenvalues(&self.matrix).iter().filter(|&&v| v > tol).count()
    }

    pub fn index_of(&self, n: &Mode) -> Option<usize> {
        self.modes.binary_search(n).ok()
    }
}

impl Serialize for SigmaProxy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.modes.len();
        let part = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(&self.matrix[(i, j)])).collect()).collect()
        };
        let modes: Vec<Vec<String>> = self
            .lambda_modes
            .iter()
            .map(|m| m.entries().iter().map(format_rational).collect())
            .collect();
        let mut st = s.serialize_struct("SigmaProxy", 7)?;
        st.serialize_field("module", &self.module)?;
        st.serialize_field("h", &self.h)?;
        st.serialize_field("R", &self.scale)?;
        st.serialize_field("modes", &modes)?;
        st.serialize_field("matrix_re", &part(|z| z.re))?;
        st.serialize_field("matrix_im", &part(|z| z.im))?;
        st.serialize_field("trace", &self.trace())?;
        st.end()
    }
}

/// `ρ[n, n'] = Σ_σ û(σ+m) conj(û(σ+m')) √χ(m/R) √χ(m'/R)`.
pub fn sigma_proxy(u: &FourierState, module: &PrimitiveModule, h: f64, cutoff: Cutoff) -> Result<SigmaProxy> {
    check_dim(module.dim(), u.dim())?;
    let geo = geometry(module);
    let complement = geo.complement().clone();
    let mut groups: BTreeMap<Mode, Vec<(Mode, Complex64)>> = BTreeMap::new();
    let mut representatives: BTreeMap<Mode, Mode> = BTreeMap::new();
    for (k, c) in u.iter() {
        let n = module.pair_with_basis(k);
        let w = cutoff.sqrt_inner(geo.lambda_norm_sq(&n).sqrt());
        representatives.entry(n.clone()).or_insert_with(|| k.clone());
        groups.entry(complement.pair_with_basis(k)).or_default().push((n, c * w));
    }
    let modes: Vec<Mode> = representatives.keys().cloned().collect();
    let lambda_modes = representatives
        .values()
        .map(|k| geo.project_rational(&RationalVector::from_integers(k.as_slice())))
        .collect();
    let index: BTreeMap<&Mode, usize> = modes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let dim = modes.len();
    let mut matrix = CMatrix::zeros(dim, dim);
    for members in groups.values() {
        for (n, a) in members {
            for (n2, b) in members {
                matrix[(index[n], index[n2])] += a * b.conj();
            }
        }
    }
    Ok(SigmaProxy { module: module.clone(), h, scale: cutoff.scale(), modes, lambda_modes, matrix })
}

/// `M_b[n, n'] = c_v` with `Bᵀv = n − n'`, for `b` a function of `x` with modes in `Λ`.
fn multiplication_matrix(b: &Symbol, plan: &PropagatorPlan, module: &PrimitiveModule) -> Result<CMatrix> {
    let window = plan.window();
    let len = window.len();
    let zeros = vec![0.0; b.dim()];
    let mut shifts = Vec::new();
    for v in b.modes() {
        if !mode_in(v, module)? {
            return Err(Error::ModeOutsideModule { mode: v.to_vec() });
        }
        shifts.push((module.pair_with_basis(v), b.coefficient(v, &zeros, &zeros)));
    }
    let mut m = CMatrix::zeros(len, len);
    for (ci, n) in window.iter().enumerate() {
        for (s, c) in &shifts {
            if let Some(ri) = window.index_of(&(&n + s)) {
                m[(ri, ci)] += c;
            }
        }
    }
    Ok(m)
}

/// `Tr(M_b U(t) σ U(t)*)` at each time, with `U` the averaged propagator.
pub fn nu_lambda_series(b: &Symbol, proxy: &SigmaProxy, plan: &PropagatorPlan, times: &[f64]) -> Result<Vec<f64>> {
    let module = plan
        .module()
        .ok_or_else(|| Error::ModeMismatch("ν_Λ needs an averaged propagator".into()))?;
    if module != proxy.module() {
        return Err(Error::ModeMismatch("proxy and plan use different modules".into()));
    }
    check_dim(module.dim(), b.dim())?;
    let window = plan.window();
    let mut embed = Vec::with_capacity(proxy.modes.len());
    for n in &proxy.modes {
        embed.push(window.index_of(n).ok_or_else(|| {
            Error::ModeMismatch(format!("proxy mode {n} lies outside the plan window"))
        })?);
    }
    let (values, vectors) = plan.eigen().ok_or(Error::NoEigenbasis)?;
    let len = window.len();
    let mut rho = CMatrix::zeros(len, len);
    for (i, &a) in embed.iter().enumerate() {
        for (j, &c) in embed.iter().enumerate() {
            rho[(a, c)] = proxy.matrix[(i, j)];
        }
    }
    let mb = multiplication_matrix(b, plan, module)?;
    // In the eigenbasis: Tr(M U ρ U*) = Σ_ab X[b,a] Y[a,b] e^{-i(λ_a − λ_b)t}
    // with X = W* M W and Y = W* ρ W.
    let x = vectors.adjoint() * &mb * &vectors;
    let y = vectors.adjoint() * &rho * &vectors;
    let scale = proxy.trace().abs() + 1.0;
    times
        .iter()
        .map(|&t| {
            let phases: Vec<Complex64> = values.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..len {
                for bb in 0..len {
                    acc += x[(bb, a)] * y[(a, bb)] * phases[a] * phases[bb].conj();
                }
            }
            if acc.im.abs() > 1e-8 * scale {
                return Err(Error::Invariant(format!("ν_Λ pairing has imaginary part {:e}", acc.im)));
            }
            Ok(acc.re)
        })
        .collect()
}

pub fn nu_lambda(b: &Symbol, proxy: &SigmaProxy, plan: &PropagatorPlan, t: f64) -> Result<f64> {
    Ok(nu_lambda_series(b, proxy, plan, &[t])?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{averaged_propagator, Potential};
    use crate::lattice::saturate;
    use crate::mode::ModeBox;

    #[test]
    fn plane_wave_proxy_is_rank_one() {
        let lam = saturate(2, &[Mode::from([1, 1])]).unwrap();
        let u = FourierState::plane_wave(Mode::from([2, 1]));
        let p = sigma_proxy(&u, &lam, 0.1, Cutoff::new(10.0)).unwrap();
        assert_eq!(p.modes(), &[Mode::from([3])]);
        assert!((p.trace() - 1.0).abs() < 1e-15);
        assert_eq!(p.lambda_modes()[0], RationalVector::from_ratios(&[(3, 2), (3, 2)]));
    }

    #[test]
    fn perpendicular_state_sits_at_zero() {
        let lam = saturate(2, &[Mode::from([1, 0])]).unwrap();
        let u = FourierState::from_modes(2, [(Mode::from([0, 3]), 0.6.into()), (Mode::from([0, -1]), Complex64::new(0.0, 0.8))]).unwrap();
        let p = sigma_proxy(&u, &lam, 0.1, Cutoff::new(1.0)).unwrap();
        assert_eq!(p.modes(), &[Mode::from([0])]);
        assert!((p.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nu_lambda_constant_symbol_keeps_trace() {
        let lam = saturate(2, &[Mode::from([1, 0])]).unwrap();
        let v = Potential::cosine(Mode::from([1, 0]), 2.0);
        let plan = averaged_propagator(&lam, &v, ModeBox::cube(1, 10)).unwrap();
        let u = FourierState::from_modes(2, [(Mode::from([1, 4]), 0.6.into()), (Mode::from([-2, 4]), Complex64::new(0.0, 0.8))]).unwrap();
        let p = sigma_proxy(&u, &lam, 0.1, Cutoff::new(5.0)).unwrap();
        let one = Symbol::constant(2, 1.0);
        for t in [0.0, 0.7, 2.0] {
            assert!((nu_lambda(&one, &p, &plan, t).unwrap() - p.trace()).abs() < 1e-12);
        }
        let json = serde_json::to_value(&p).unwrap();
        assert_eq!(json["modes"][0], serde_json::json!(["-2/1", "0/1"]));
    }
}
