//! The exact finite-`h` identity suite behind the `verify` subcommand.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::families::random_state;
use crate::lattice::{classify, in_resonant_set, saturate, PrimitiveModule, RationalVector};
use crate::microlocal::{covering_split_for, lift_isometry_check};
use crate::mode::{Mode, ModeBox};
use crate::quantization::{
    commutator_defect, lifted_pair, twomicro_pair, wigner_pair, Cutoff, EtaProfile, FourierState, Polynomial, Side,
    Symbol, SymbolTerm, XiFactor,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &str, cases: usize, worst: f64, tolerance: f64) -> Self {
        IdentityCheck { name: name.into(), cases, worst, tolerance, passed: worst <= tolerance }
    }
}

/// A band-limited `a(x)` with modes in `‖m‖_∞ ≤ 2`.
pub fn random_x_symbol(dim: usize, rng: &mut impl Rng) -> Symbol {
    let terms: Vec<(Mode, SymbolTerm)> = (0..3)
        .map(|_| {
            let m = Mode::new((0..dim).map(|_| rng.gen_range(-2..=2)));
            (m, SymbolTerm::constant(Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        })
        .collect();
    Symbol::from_terms(dim, terms).expect("dimensions agree")
}

/// A symbol with `x`-modes in `Λ` and a Gaussian or linear `ξ`-profile.
pub fn random_symbol(dim: usize, module: Option<&PrimitiveModule>, rng: &mut impl Rng) -> Symbol {
    let mut terms = Vec::new();
    for _ in 0..3 {
        let m = match module {
            Some(l) if l.rank() > 0 => {
                let mut m = Mode::zero(dim);
                for b in l.basis() {
                    m = &m + &b.scale(rng.gen_range(-1..=1));
                }
                m
            }
            Some(_) => Mode::zero(dim),
            None => Mode::new((0..dim).map(|_| rng.gen_range(-2..=2))),
        };
        let xi = if rng.gen_bool(0.5) {
            XiFactor::Gauss { center: (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(), width: rng.gen_range(0.3..1.5) }
        } else {
            XiFactor::Poly(Polynomial::linear(&(0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()))
        };
        let coeff = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        terms.push((m, SymbolTerm { coeff, xi: vec![xi], eta: EtaProfile::Const }));
    }
    Symbol::from_terms(dim, terms).expect("dimensions agree")
}

/// `∫ a |u|² dx` by the trapezoidal rule on an `n^d` grid, exact once `n` exceeds the bandwidth.
pub fn density_quadrature(u: &FourierState, a: &Symbol, n: usize) -> Complex64 {
    let d = u.dim();
    let zero = vec![0.0; d];
    let cell = (TAU / n as f64).powi(d as i32);
    let mut acc = Complex64::new(0.0, 0.0);
    for idx in ModeBox::new(Mode::zero(d), Mode::new(vec![n as i64 - 1; d])).iter() {
        let x: Vec<f64> = idx.iter().map(|&i| TAU * i as f64 / n as f64).collect();
        acc += a.value(&x, &zero, &zero) * u.evaluate(&x).norm_sqr();
    }
    acc * cell
}

fn random_rational(dim: usize, rng: &mut impl Rng) -> RationalVector {
    let den = rng.gen_range(1..=6);
    let pairs: Vec<(i64, i64)> = (0..dim)
        .map(|_| if rng.gen_bool(0.3) { (0, 1) } else { (rng.gen_range(-6..=6), den) })
        .collect();
    RationalVector::from_ratios(&pairs)
}

/// Saturation of `{k : ‖k‖_∞ ≤ bound, k·ξ = 0}`, searched with integer arithmetic on `Lξ`.
pub fn brute_force_stabilizer(xi: &RationalVector, bound: i64) -> PrimitiveModule {
    let c: Vec<i128> = xi
        .cleared()
        .iter()
        .map(|v| num_traits::ToPrimitive::to_i128(v).expect("cleared frequency fits in i128"))
        .collect();
    let gens: Vec<Mode> = ModeBox::cube(xi.dim(), bound)
        .iter()
        .filter(|k| !k.is_zero() && k.iter().zip(&c).map(|(&a, &b)| a as i128 * b).sum::<i128>() == 0)
        .collect();
    saturate(xi.dim(), &gens).expect("dimensions agree")
}

pub fn standard_modules() -> Vec<PrimitiveModule> {
    vec![
        saturate(2, &[Mode::from([1, 0])]).expect("valid"),
        saturate(2, &[Mode::from([1, 1])]).expect("valid"),
        saturate(2, &[Mode::from([1, 2])]).expect("valid"),
    ]
}

/// Runs the five exact identities on a seeded corpus.
pub fn verify_identities(seed: u64) -> Result<Vec<IdentityCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for s in 0..20 {
        let u = random_state(2, 6, seed.wrapping_add(s));
        let a = random_x_symbol(2, &mut rng);
        let h = 1.0 / 16.0;
        worst = worst.max((wigner_pair(&u, &a, h) - density_quadrature(&u, &a, 32)).norm());
        cases += 1;
    }
    out.push(IdentityCheck::new("marginal", cases, worst, 1e-10));

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = random_symbol(2, None, &mut rng);
        worst = worst.max(commutator_defect(&a, 1.0 / 8.0, 6).defect);
    }
    out.push(IdentityCheck::new("commutator", 20, worst, 1e-10));

    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (i, module) in standard_modules().iter().enumerate() {
        for s in 0..4 {
            let u = random_state(2, 6, seed.wrapping_add(100 + 10 * i as u64 + s));
            let a = random_symbol(2, Some(module), &mut rng)
                .with_eta(EtaProfile::Angular { dir: vec![1.0, 0.5], inner: 0.25 }, 1.0)
                .with_module(module.clone())?;
            for h in [1.0 / 8.0, 1.0 / 16.0] {
                for r in [2.0, 8.0] {
                    let c = Cutoff::new(r);
                    let sum = twomicro_pair(&u, &a, h, c, Side::Inner)? + twomicro_pair(&u, &a, h, c, Side::Outer)?;
                    worst = worst.max((sum - lifted_pair(&u, &a, h)?).norm());
                    cases += 1;
                }
            }
        }
    }
    out.push(IdentityCheck::new("sum-decomposition", cases, worst, 1e-12));

    let mut bad = 0usize;
    for i in 0..200 {
        let dim = 2 + i % 2;
        let xi = random_rational(dim, &mut rng);
        let module = classify(&xi);
        if !in_resonant_set(&xi, &module) || module != brute_force_stabilizer(&xi, 20) {
            bad += 1;
        }
    }
    out.push(IdentityCheck::new("partition", 200, bad as f64, 0.0));

    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (i, module) in standard_modules().iter().enumerate() {
        let split = covering_split_for(module, 8)?;
        for s in 0..10 {
            let u = random_state(2, 6, seed.wrapping_add(500 + 20 * i as u64 + s));
            let r = lift_isometry_check(&u, &split)?;
            worst = worst.max(if r.lambda_modes_have_zero_sigma { r.defect } else { f64::INFINITY });
            cases += 1;
        }
    }
    out.push(IdentityCheck::new("isometry", cases, worst, 1e-12));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for c in verify_identities(11).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn brute_force_stabilizer_example() {
        let xi = RationalVector::from_ratios(&[(1, 3), (1, 2)]);
        let m = brute_force_stabilizer(&xi, 6);
        assert_eq!(m, classify(&xi));
        assert_eq!(m.basis(), &[Mode::from([3, -2])]);
    }
}
