use std::process::Command;

use torus_micro::harness::{execute, run, snap_frequency, ExperimentSpec};
use torus_micro::lattice::RationalVector;
use torus_micro::observability::{gram, observability_constant, ObservationSpec};
use torus_micro::dynamics::Potential;
use torus_micro::{Error, Mode};

fn spec(text: &str) -> ExperimentSpec {
    ExperimentSpec::from_json(text).unwrap()
}

fn field_of(e: Error) -> String {
    match e {
        Error::Validation { field, .. } => field,
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn non_primitive_module_names_its_saturation() {
    let s = spec(r#"{"kind": "twomicro", "d": 2, "h_grid": ["1/8"], "R_grid": ["2"],
        "family": {"name": "random", "n": 2, "seed": 1}, "module": [[2, 2]],
        "symbols": [{"terms": [{"k": [0, 0], "re": "1"}]}]}"#);
    let err = execute(&s).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    assert!(msg.contains("saturation") && msg.contains("[1, 1]"), "{msg}");
}

#[test]
fn random_family_requires_seed() {
    let s = spec(r#"{"kind": "evolve", "d": 1, "h_grid": ["1/8"], "t_samples": ["0"],
        "family": {"name": "random", "n": 2}}"#);
    assert_eq!(field_of(s.validate().unwrap_err()), "family.seed");
}

#[test]
fn unknown_fields_are_rejected() {
    let err = ExperimentSpec::from_json(r#"{"kind": "classify", "d": 2, "frequencies": [], "bogus": 1}"#).unwrap_err();
    assert_eq!(field_of(err), "spec");
}

#[test]
fn grids_must_be_ordered() {
    let s = spec(r#"{"kind": "evolve", "d": 1, "h_grid": ["1/16", "1/8"], "t_samples": ["0"],
        "family": {"name": "plane_wave", "xi0": ["1"]}}"#);
    assert_eq!(field_of(s.validate().unwrap_err()), "h_grid");
}

#[test]
fn observation_must_not_overlap() {
    let s = spec(r#"{"kind": "observability", "d": 1, "N": 2,
        "observation": {"omega": [[["0", "1/2"]], [["1/4", "3/4"]]], "T": "1"}}"#);
    assert!(s.validate().is_err());
}

#[test]
fn classify_example() {
    let xi = RationalVector::from_ratios(&[(1, 3), (1, 2)]);
    let m = torus_micro::lattice::classify(&xi);
    assert_eq!(m.rank(), 1);
    assert_eq!(m.basis(), &[Mode::from([3, -2])]);
}

#[test]
fn snap_reports_non_resonant_frequencies() {
    let r = snap_frequency(&[2f64.sqrt(), 1.0], 10);
    assert!(r.non_resonant);
    let r = snap_frequency(&[1.0 / 3.0, 0.5], 10);
    assert!(!r.non_resonant);
}

#[test]
fn full_torus_gram_is_horizon_times_identity() {
    let spec = ObservationSpec::full_torus(1, 1.5).unwrap();
    let v = Potential::cosine(Mode::from([2]), 0.7);
    let c = observability_constant(&gram(&spec, &v, 6).unwrap());
    assert!((c.lambda_min - 1.5).abs() < 1e-10 && (c.lambda_max - 1.5).abs() < 1e-10);
}

#[test]
fn run_writes_csv_and_summary() {
    let s = spec(r#"{"kind": "classify", "d": 2, "frequencies": [["1/3", "1/2"], ["0", "0"]], "max_den": 10}"#);
    let dir = tempfile::tempdir().unwrap();
    let record = run(&s, dir.path()).unwrap();
    for f in &record.outputs {
        assert!(dir.path().join(&f.name).exists(), "{}", f.name);
    }
    assert!(dir.path().join("summary.json").exists());
    assert!(dir.path().join("record.json").exists());
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torus-micro"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"kind": "classify", "d": 2, "frequencies": [["1/3", "1/2"]], "max_den": 10}"#).unwrap();
    let out = dir.path().join("out");
    let status = cli().args(["classify", "--spec"]).arg(&good).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("summary.json").exists());

    let status = cli().args(["evolve", "--spec"]).arg(&good).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind": "classify", "d": 9, "frequencies": []}"#).unwrap();
    let status = cli().args(["classify", "--spec"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = cli().args(["classify", "--spec"]).arg(dir.path().join("missing.json")).status().unwrap();
    assert_eq!(status.code(), Some(1));
}
