use std::fs;
use std::path::Path;
use std::process::{Command as Process, Output};

use facerot::exec::Execution;
use facerot::fields::DiscreteVectorField;
use facerot::io::{read_field_csv, write_field_csv};
use facerot::lattice::{Axis, Torus};
use facerot_cli::experiments;
use facerot_cli::spec::{Command, ExperimentSpec};

fn facerot(args: &[&str]) -> Output {
    Process::new(env!("CARGO_BIN_EXE_facerot")).args(args).output().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn verify_passes_and_mutation_fails() {
    let ok = facerot(&["verify"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8_lossy(&ok.stdout);
    assert!(text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .all(|l| l.contains(" PASS ")));
    assert_eq!(facerot(&["verify", "--mutate"]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(facerot(&["simulate", "--n", "2"]).status.code(), Some(2));
    assert_eq!(facerot(&["simulate", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(
        facerot(&["simulate", "--field", "no-such-field"]).status.code(),
        Some(2)
    );
    assert_eq!(facerot(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hodge.toml");
    fs::write(&cfg, "version = 1\ncommand = \"hodge\"\n").unwrap();
    let out = facerot(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&cfg, "version = 1\ncommand = \"hodge\"\n[sim]\nsides = 4\n").unwrap();
    let out = facerot(&["hodge", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sides"));
}

#[test]
fn simulate_is_reproducible_and_writes_artifacts() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, seed) in dirs.iter().zip(["5", "5", "6"]) {
        let out = facerot(&[
            "simulate",
            "--n",
            "8",
            "--ensemble",
            "4",
            "--seed",
            seed,
            "--alpha",
            "-0.4",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b, c) = (dirs[0].path(), dirs[1].path(), dirs[2].path());
    for name in ["pairings.csv", "snapshots.csv", "counters.csv", "ensemble.csv"] {
        assert_eq!(read(a, name), read(b, name), "{name} differs between identical runs");
    }
    assert_ne!(read(a, "pairings.csv"), read(c, "pairings.csv"));

    let manifest: serde_json::Value = serde_json::from_str(&read(a, "manifest.json")).unwrap();
    assert_eq!(manifest["complete"], true);
    assert!(manifest["rng"].as_str().unwrap().contains("ChaCha8"));
    assert!(manifest["field_registry"]["Gb"].is_string());
    assert_eq!(manifest["runs"][0]["seed"], 5);

    let spec = ExperimentSpec::from_toml(&read(a, "spec.toml")).unwrap();
    assert_eq!(spec.sim.n, 8);
    assert_eq!(spec.sim.alpha, -0.4);

    let pairings = read(a, "pairings.csv");
    assert!(pairings.starts_with("run,trajectory,time,field_id,value"));
    // 4 trajectories x 2 times x (5 + 3 + 50 Fourier modes + dual norm)
    assert_eq!(pairings.lines().count(), 1 + 4 * 2 * 59);
    let counters = read(a, "counters.csv");
    // snapshots at 0, 0.02 and 0.05, 2 N^2 edges each
    assert_eq!(counters.lines().count(), 1 + 4 * 3 * 128);
}

fn sample_field(torus: &Torus) -> DiscreteVectorField {
    let f: Vec<f64> = (0..torus.num_vertices()).map(|k| ((k * 7 % 11) as f64).sin()).collect();
    let mut phi = DiscreteVectorField::gradient(torus, &f);
    phi.axpy(0.25, &DiscreteVectorField::harmonic(torus, Axis::Y));
    phi
}

#[test]
fn hodge_decomposes_a_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let torus = Torus::new(6).unwrap();
    let phi = sample_field(&torus);
    let path = dir.path().join("field.csv");
    write_field_csv(fs::File::create(&path).unwrap(), &torus, &phi).unwrap();
    let out_dir = dir.path().join("out");
    let out = facerot(&[
        "hodge",
        "--n",
        "6",
        "--field",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let load = |name: &str| read_field_csv(read(&out_dir, name).as_bytes(), &torus).unwrap();
    let circulation = load("circulation.csv");
    assert!(circulation.max_abs() < 1e-12);
    let harmonic = load("harmonic.csv");
    let rebuilt = load("gradient.csv").add(&harmonic);
    assert!(phi.sub(&rebuilt).max_abs() < 1e-12);
    assert!((harmonic.canonical_values()[1] - 0.25).abs() < 1e-12);
}

#[test]
fn simulate_accepts_a_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let torus = Torus::new(5).unwrap();
    let path = dir.path().join("field.csv");
    write_field_csv(fs::File::create(&path).unwrap(), &torus, &{
        let mut h = DiscreteVectorField::zeros(&torus);
        h.axpy(0.1, &sample_field(&torus));
        h
    })
    .unwrap();
    let out = facerot(&[
        "simulate",
        "--n",
        "5",
        "--ensemble",
        "2",
        "--field",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    // a field file of the wrong size is rejected
    let out = facerot(&[
        "simulate",
        "--n",
        "6",
        "--ensemble",
        "2",
        "--field",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn without_rotation_the_circulation_prediction_vanishes() {
    let mut spec = ExperimentSpec::defaults(Command::CurrentCompare);
    spec.sim.n = 12;
    spec.sim.ensemble = 30;
    spec.sim.alpha = 0.0;
    spec.analysis.grid = 32;
    let main = experiments::main_ensemble(&spec, Execution::Parallel).unwrap();
    let out = experiments::current_compare_with(&spec, main, Execution::Parallel).unwrap();
    let anti: Vec<_> = out.rows.iter().filter(|r| r.experiment == "antisymmetric").collect();
    assert_eq!(anti.len(), 6);
    assert!(anti.iter().all(|r| r.predicted == 0.0));
    assert!(
        out.passed(),
        "{:#?}",
        out.rows.iter().filter(|r| !r.passed).collect::<Vec<_>>()
    );
}

#[test]
fn einstein_rejects_non_uniform_setups() {
    let mut spec = ExperimentSpec::defaults(Command::Einstein);
    spec.sim.profile = "sine".into();
    assert!(experiments::run(&spec).is_err());
    let mut spec = ExperimentSpec::defaults(Command::Einstein);
    spec.sim.field = "grad-sin:0.1".into();
    assert!(experiments::run(&spec).is_err());
}
