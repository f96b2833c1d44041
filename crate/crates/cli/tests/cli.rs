// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_photon-window"));
    c.env_remove("PHOTON_WINDOW_JOBS");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path, stem: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(format!("{stem}.manifest.json"))).expect("manifest written");
    serde_json::from_str(&text).expect("manifest is json")
}

#[test]
fn figure_two_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figure", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("xi,j0,g_gamma_1,g_gamma_2.5"));
    assert_eq!(csv.lines().count(), 1 + 751);
    let m = manifest(dir.path(), "fig2");
    assert_eq!(m["command"], "figure 2");
    assert_eq!(m["artifact_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["outputs"][0], "fig2.csv");
    for key in ["tolerances", "seed", "timestamp", "params"] {
        assert!(m.get(key).is_some(), "{key}");
    }
}

#[test]
fn unknown_figure_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figure", "7"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("figure id"));
}

#[test]
fn unknown_config_key_names_key_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, "{\n  \"gamma\": 0.5,\n  \"rabbi\": 0.1\n}\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "validate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("rabbi"), "{err}");
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn malformed_json_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, "{\"gamma\": }").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "sample"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1"));
}

#[test]
fn passing_validation_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"validation": {"criteria": [2]}}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "validate"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS criterion 2"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validation.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["criteria"][0]["id"], 2);
}

#[test]
fn divergent_sampler_is_reported_not_crashed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"gamma": 0, "rabi": 0.1, "validation": {"criteria": [6]}}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "validate"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL criterion 6"), "{stdout}");
    assert!(stdout.contains("diverges"), "{stdout}");
}

#[test]
fn physical_units_block() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"physical": {"units": "MHz", "omega_rf": 140, "gamma": 70, "rabi": 14, "v_e": 140},
            "sweep": {"variable": "gamma", "lo": 0.5, "hi": 0.6, "step": 0.1, "engines": ["rg_weak"]}}"#,
    )
    .unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "sweep"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let m = manifest(dir.path(), "sweep");
    assert_eq!(m["params"]["gamma"], 0.5);
    assert_eq!(m["params"]["rabi"], 0.1);
    assert_eq!(m["params"]["xi"], 1.0);
    assert_eq!(m["spec"]["variable"], "gamma");

    std::fs::write(
        &cfg,
        r#"{"physical": {"units": "kHz", "omega_rf": 1, "gamma": 1, "rabi": 1}}"#,
    )
    .unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "sample"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kHz"));
}

#[test]
fn sweep_flags_and_deterministic_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--variable",
        "delta",
        "--lo",
        "-1",
        "--hi",
        "1",
        "--step",
        "0.25",
        "--gamma",
        "0.2",
        "--rabi",
        "0.05",
        "--xi",
        "1.14",
        "--engine",
        "rg_detuned,rg_strong",
    ];
    let out = run(&args, a.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut par = bin();
    par.args(args).arg("--out-dir").arg(b.path()).arg("--jobs").arg("3");
    assert_eq!(par.output().unwrap().status.code(), Some(0));
    let first = std::fs::read(a.path().join("sweep.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.path().join("sweep.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    let header = text.lines().next().unwrap();
    assert!(
        header.starts_with("index,gamma,rabi,delta,xi,rg_detuned_inverse_tau"),
        "{header}"
    );
    assert_eq!(text.lines().count(), 1 + 9);
    assert!(text.lines().nth(1).unwrap().starts_with("0,0.2,0.05,-1,1.14,"));
}

#[test]
fn sweep_without_range_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--variable", "xi"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("'lo'"));
    let out = run(
        &["sweep", "--variable", "xi", "--lo", "1", "--hi", "0", "--step", "0.1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jobs_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sample", "--samples", "10", "--jobs", "1", "--out-dir"])
        .arg(dir.path())
        .env("PHOTON_WINDOW_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let expected = if cfg!(feature = "parallel") { 2 } else { 1 };
    assert_eq!(manifest(dir.path(), "samples")["jobs"], expected);

    let bad = bin()
        .args(["sample", "--samples", "10", "--out-dir"])
        .arg(dir.path())
        .env("PHOTON_WINDOW_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("PHOTON_WINDOW_JOBS"));
}

#[test]
fn sample_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let read = |seed: &str| {
        let out = run(&["sample", "--samples", "200", "--seed", seed], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        std::fs::read_to_string(dir.path().join("samples.csv")).unwrap()
    };
    let a = read("7");
    assert_eq!(a, read("7"));
    assert_ne!(a, read("8"));
    assert_eq!(a.lines().next(), Some("index,tau"));
    assert_eq!(a.lines().count(), 201);
    assert_eq!(manifest(dir.path(), "samples")["seed"], 8);
}

#[test]
fn simulate_and_extrema() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", "--t-end", "2", "--gamma", "1", "--xi", "0"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(
        traj.lines().next(),
        Some("t,psi_g_re,psi_g_im,psi_e_re,psi_e_im,survival")
    );
    assert!(traj.lines().nth(1).unwrap().starts_with("0,1,0,0,0,1"));
    // undriven mean waiting time Gamma/Omega^2 + 2/Gamma
    let mean = manifest(dir.path(), "trajectory")["summary"]["mean_tau"]
        .as_f64()
        .unwrap();
    assert!((mean - 102.0).abs() < 1e-5 * 102.0, "{mean}");

    let out = run(
        &["extrema", "--gamma", "0.5", "--xi-lo", "1", "--xi-hi", "4"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let ext = std::fs::read_to_string(dir.path().join("extrema.csv")).unwrap();
    assert_eq!(ext.lines().next(), Some("xi_star,kind,gamma,n"));
    let kinds: Vec<&str> = ext.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(kinds, ["max", "min"]);
}

#[test]
fn bad_parameters_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["sample", "--gamma", "-1"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["sample", "--engine", "magic"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["sample", "--samples", "0"], dir.path()).status.code(), Some(2));
}
