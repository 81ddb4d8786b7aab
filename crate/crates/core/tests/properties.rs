use num_complex::Complex64;
use proptest::prelude::*;

use torus_micro::dynamics::{Potential, PropagatorPlan, Scheme};
use torus_micro::families::random_state;
use torus_micro::harness::{best_rational, ExperimentSpec};
use torus_micro::lattice::{classify, geometry, in_resonant_set, mode_in, saturate, RationalVector};
use torus_micro::microlocal::{covering_split_for, lift_isometry_check, sigma_proxy};
use torus_micro::observability::{gram, observability_constant, ObservationSpec};
use torus_micro::quantization::{lifted_pair, twomicro_pair, Cutoff, Side, Symbol};
use torus_micro::{Mode, ModeBox};

fn mode(d: usize, r: i64) -> impl Strategy<Value = Mode> {
    prop::collection::vec(-r..=r, d).prop_map(Mode::from)
}

fn generators(d: usize) -> impl Strategy<Value = Vec<Mode>> {
    prop::collection::vec(mode(d, 4), 0..=d)
}

fn rational(d: usize) -> impl Strategy<Value = RationalVector> {
    (prop::collection::vec(-5i64..=5, d), 1i64..=6).prop_map(|(p, q)| {
        RationalVector::from_ratios(&p.iter().map(|&x| (x, q)).collect::<Vec<_>>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn saturate_is_idempotent(gens in generators(3)) {
        let m = saturate(3, &gens).unwrap();
        prop_assert_eq!(saturate(3, m.basis()).unwrap(), m);
    }

    #[test]
    fn saturate_ignores_order_and_scaling(gens in generators(3), s in 1i64..4) {
        let m = saturate(3, &gens).unwrap();
        let mut rev: Vec<Mode> = gens.iter().rev().map(|g| g.scale(s)).collect();
        rev.push(Mode::zero(3));
        prop_assert_eq!(saturate(3, &rev).unwrap(), m);
    }

    #[test]
    fn membership_is_projection_fixed_point(gens in generators(3), k in mode(3, 6)) {
        let m = saturate(3, &gens).unwrap();
        let geo = geometry(&m);
        let kr = RationalVector::from_integers(k.as_slice());
        prop_assert_eq!(mode_in(&k, &m).unwrap(), geo.project_rational(&kr) == kr);
    }

    #[test]
    fn projector_is_symmetric_idempotent(gens in generators(3)) {
        let m = saturate(3, &gens).unwrap();
        let p = geometry(&m).projector_f64().to_vec();
        for i in 0..3 {
            for j in 0..3 {
                let pp: f64 = (0..3).map(|l| p[i][l] * p[l][j]).sum();
                prop_assert!((pp - p[i][j]).abs() < 1e-12);
                prop_assert!((p[i][j] - p[j][i]).abs() < 1e-12);
            }
        }
        prop_assert_eq!(p.iter().enumerate().map(|(i, r)| r[i]).sum::<f64>().round() as usize, m.rank());
    }

    #[test]
    fn classification_is_a_partition(xi in rational(3), gens in generators(3)) {
        let own = classify(&xi);
        prop_assert!(in_resonant_set(&xi, &own));
        let other = saturate(3, &gens).unwrap();
        prop_assert_eq!(in_resonant_set(&xi, &other), other == own);
    }

    #[test]
    fn covering_split_is_isometric(gens in generators(2), seed in any::<u64>()) {
        let m = saturate(2, &gens).unwrap();
        let split = covering_split_for(&m, 5).unwrap();
        let u = random_state(2, 4, seed);
        let r = lift_isometry_check(&u, &split).unwrap();
        prop_assert!(r.defect <= 1e-12);
        prop_assert!(r.lambda_modes_have_zero_sigma);
    }

    #[test]
    fn sigma_proxy_is_psd_within_budget(gens in generators(2), seed in any::<u64>(), r in 0.5f64..8.0) {
        let m = saturate(2, &gens).unwrap();
        let u = random_state(2, 5, seed);
        let p = sigma_proxy(&u, &m, 1.0 / 8.0, Cutoff::new(r)).unwrap();
        prop_assert!(p.min_eigenvalue() >= -1e-10);
        prop_assert!(p.trace() <= u.norm_sq() + 1e-12);
    }

    #[test]
    fn inner_plus_outer_is_uncut(seed in any::<u64>(), which in 0usize..3, r in 0.5f64..10.0) {
        let m = [Mode::from([1, 0]), Mode::from([1, 1]), Mode::from([2, 1])][which].clone();
        let module = saturate(2, std::slice::from_ref(&m)).unwrap();
        let a = Symbol::cosine(m, 1.0).plus(&Symbol::constant(2, 0.5)).with_module(module).unwrap();
        let u = random_state(2, 5, seed);
        let c = Cutoff::new(r);
        let h = 1.0 / 16.0;
        let sum = twomicro_pair(&u, &a, h, c, Side::Inner).unwrap() + twomicro_pair(&u, &a, h, c, Side::Outer).unwrap();
        prop_assert!((sum - lifted_pair(&u, &a, h).unwrap()).norm() <= 1e-12);
    }

    #[test]
    fn propagation_is_unitary(seed in any::<u64>(), t in 0.0f64..3.0, amp in -2.0f64..2.0) {
        let v = Potential::cosine(Mode::from([1, 1]), amp);
        let u = random_state(2, 3, seed);
        let plan = PropagatorPlan::new(v, ModeBox::cube(2, 7), Scheme::Eigenbasis).unwrap();
        let out = plan.trajectory(&u, &[t]).unwrap();
        prop_assert!((out[0].norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_spectrum_bounds_and_monotonicity(lo in 0.0f64..0.5, len in 0.05f64..0.4, t in 0.2f64..2.0, amp in 0.0f64..2.0) {
        let tau = std::f64::consts::TAU;
        let v = Potential::cosine(Mode::from([1]), amp);
        let small = ObservationSpec::new(1, vec![vec![(tau * lo, tau * (lo + len))]], t).unwrap();
        let big = ObservationSpec::new(1, vec![vec![(tau * lo, tau * (lo + len + 0.1))]], t).unwrap();
        let longer = ObservationSpec::new(1, vec![vec![(tau * lo, tau * (lo + len))]], t + 0.5).unwrap();
        let c = observability_constant(&gram(&small, &v, 4).unwrap());
        prop_assert!(c.lambda_min >= -1e-12 && c.lambda_min <= c.lambda_max && c.lambda_max <= t + 1e-10);
        prop_assert!(observability_constant(&gram(&big, &v, 4).unwrap()).lambda_min >= c.lambda_min - 1e-10);
        prop_assert!(observability_constant(&gram(&longer, &v, 4).unwrap()).lambda_min >= c.lambda_min - 1e-10);
    }

    #[test]
    fn best_rational_beats_every_smaller_denominator(x in -5.0f64..5.0, max_den in 1i64..60) {
        let (p, q) = best_rational(x, max_den);
        prop_assert!(q >= 1 && q <= max_den);
        let err = (x - p as f64 / q as f64).abs();
        for qq in 1..=max_den {
            let cand = (x * qq as f64).round() / qq as f64;
            prop_assert!(err <= (x - cand).abs() + 1e-12);
        }
    }

    #[test]
    fn spec_json_round_trip_is_idempotent(h in prop::collection::vec(1u32..200, 1..4), seed in any::<u64>(), amp in -3.0f64..3.0) {
        let mut hs: Vec<f64> = h.iter().map(|&x| 1.0 / x as f64).collect();
        hs.sort_by(|a, b| b.total_cmp(a));
        hs.dedup();
        let hs: Vec<String> = hs.iter().map(|x| format!("\"{x}\"")).collect();
        let text = format!(
            r#"{{"kind": "evolve", "d": 1, "h_grid": [{}], "t_samples": ["0", "1/3"],
                "potential": {{"modes": [{{"k": [1], "re": "{amp}"}}, {{"k": [-1], "re": "{amp}"}}]}},
                "family": {{"name": "random", "n": 2, "seed": {seed}}}}}"#,
            hs.join(", ")
        );
        let spec = ExperimentSpec::from_json(&text).unwrap();
        spec.validate().unwrap();
        let once = spec.to_json();
        let again = ExperimentSpec::from_json(&once).unwrap();
        prop_assert_eq!(&again, &spec);
        prop_assert_eq!(again.to_json(), once);
    }
}

#[test]
fn complex_coefficient_round_trip() {
    // Potential values survive the config form exactly.
    let v = Potential::from_modes(1, [(Mode::from([2]), Complex64::new(0.1, 0.3)), (Mode::from([-2]), Complex64::new(0.1, -0.3))]).unwrap();
    let spec = torus_micro::dynamics::PotentialSpec::from_potential(&v);
    let text = serde_json::to_string(&spec).unwrap();
    let back: torus_micro::dynamics::PotentialSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back.build(1).unwrap(), v);
}
