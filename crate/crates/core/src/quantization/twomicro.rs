//! Two-microlocal pairings: Weyl pairings with cutoff weights in `P_Λξ/(Rh)`,
//! evaluated at the midpoint, where they become `w(P_Λ(j+k)/2R)`.

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::lattice::{mode_in, PrimitiveModule};

use super::cutoff::{Cutoff, Side};
use super::state::FourierState;
use super::symbol::Symbol;
use super::weyl::Midpoint;

fn tagged_module(a: &Symbol) -> Result<&PrimitiveModule> {
    a.module().ok_or(Error::MissingModuleTag)
}

/// Pairing with `ã(x, ξ) = w(P_Λξ/Rh) a(x, ξ, P_Λξ/h)`, `w = χ` (inner) or `1 − χ` (outer).
pub fn twomicro_pair(u: &FourierState, a: &Symbol, h: f64, cutoff: Cutoff, side: Side) -> Result<Complex64> {
    let module = tagged_module(a)?;
    check_dim(a.dim(), u.dim())?;
    Ok(Midpoint::lifted(module).with_level(module, cutoff, side).pair(u, a, h))
}

/// Uncut pairing with `a(x, ξ, P_Λξ/h)`.
pub fn lifted_pair(u: &FourierState, a: &Symbol, h: f64) -> Result<Complex64> {
    let module = tagged_module(a)?;
    check_dim(a.dim(), u.dim())?;
    Ok(Midpoint::lifted(module).pair(u, a, h))
}

/// Checks that `chain` is strictly decreasing: each module lies inside its
/// predecessor and has smaller rank.
pub fn check_chain(chain: &[PrimitiveModule]) -> Result<()> {
    for (level, pair) in chain.windows(2).enumerate() {
        let (outer, inner) = (&pair[0], &pair[1]);
        check_dim(outer.dim(), inner.dim())?;
        let contained = inner
            .basis()
            .iter()
            .try_fold(true, |acc, b| Ok::<_, Error>(acc && mode_in(b, outer)?))?;
        if !contained || inner.rank() >= outer.rank() {
            return Err(Error::ChainNotDecreasing { level: level + 1 });
        }
    }
    Ok(())
}

/// Pairing with the product of per-level weights `w_i(P_{Λ_i}ξ/R_i h)`, the
/// `η`-slot taken along the last module of the chain.
pub fn nested_twomicro_pair(
    u: &FourierState,
    a: &Symbol,
    chain: &[PrimitiveModule],
    h: f64,
    cutoffs: &[Cutoff],
    sides: &[Side],
) -> Result<Complex64> {
    if chain.is_empty() {
        return Err(Error::validation("chain", "at least one module is required"));
    }
    if cutoffs.len() != chain.len() || sides.len() != chain.len() {
        return Err(Error::validation("cutoffs", "one cutoff and one side per chain level"));
    }
    check_chain(chain)?;
    let last = chain.last().expect("non-empty chain");
    check_dim(last.dim(), a.dim())?;
    check_dim(a.dim(), u.dim())?;
    for m in a.modes() {
        if !mode_in(m, last)? {
            return Err(Error::ModeOutsideModule { mode: m.to_vec() });
        }
    }
    let mut rule = Midpoint::lifted(last);
    for ((module, cutoff), side) in chain.iter().zip(cutoffs).zip(sides) {
        rule = rule.with_level(module, *cutoff, *side);
    }
    Ok(rule.pair(u, a, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::saturate;
    use crate::mode::Mode;
    use crate::quantization::symbol::EtaProfile;
    use crate::quantization::weyl::wigner_pair;

    fn state() -> FourierState {
        FourierState::from_modes(
            2,
            (-3..=3).flat_map(|a| (-3..=3).map(move |b| (Mode::from([a, b]), Complex64::new(0.1 * a as f64, 0.05 * (a * b) as f64 + 0.3)))),
        )
        .unwrap()
    }

    #[test]
    fn inner_plus_outer_is_uncut() {
        let lam = saturate(2, &[Mode::from([1, 1])]).unwrap();
        let a = Symbol::cosine(Mode::from([2, 2]), 1.0)
            .with_eta(EtaProfile::Angular { dir: vec![1.0, 0.0], inner: 0.3 }, 1.5)
            .with_module(lam)
            .unwrap();
        let u = state();
        let c = Cutoff::new(1.3);
        let sum = twomicro_pair(&u, &a, 0.1, c, Side::Inner).unwrap()
            + twomicro_pair(&u, &a, 0.1, c, Side::Outer).unwrap();
        assert!((sum - lifted_pair(&u, &a, 0.1).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn zero_module_has_no_outer_part() {
        let a = Symbol::cosine(Mode::from([0, 0]), 2.0).with_module(PrimitiveModule::zero(2)).unwrap();
        let u = state();
        let c = Cutoff::new(2.0);
        assert_eq!(twomicro_pair(&u, &a, 0.1, c, Side::Outer).unwrap(), Complex64::new(0.0, 0.0));
        let inner = twomicro_pair(&u, &a, 0.1, c, Side::Inner).unwrap();
        assert!((inner - wigner_pair(&u, &a, 0.1)).norm() < 1e-14);
        assert!(matches!(
            twomicro_pair(&u, &Symbol::constant(2, 1.0), 0.1, c, Side::Inner),
            Err(Error::MissingModuleTag)
        ));
    }

    #[test]
    fn chain_must_decrease() {
        let full = PrimitiveModule::full(2);
        let line = saturate(2, &[Mode::from([1, 0])]).unwrap();
        let other = saturate(2, &[Mode::from([0, 1])]).unwrap();
        assert!(check_chain(&[full.clone(), line.clone()]).is_ok());
        assert!(matches!(check_chain(&[line.clone(), line.clone()]), Err(Error::ChainNotDecreasing { level: 1 })));
        assert!(check_chain(&[full, line, other]).is_err());
    }
}
