//! End-to-end tests of the `chirped-duffing` binary: exit codes, output
//! files, config/flag precedence, and worker-count determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chirped-duffing"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn ladder_run_writes_populations_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&[
        "ladder",
        "--p1", "0.8",
        "--p2", "8",
        "--tau0=-4",
        "--tau-end", "2",
        "--basis-size", "24",
        "--out", out.to_str().unwrap(),
    ]);
    assert_exit(&o, 0);

    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "ladder");
    assert_eq!(manifest["config"]["p1"], 0.8);
    assert_eq!(manifest["config"]["basis_size"], 24);

    let summary = read_json(&out.join("summary.json"));
    assert!(summary["max_norm_drift"].as_f64().unwrap() < 1e-8);

    let csv = std::fs::read_to_string(out.join("populations.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("tau,n,population"));
    // one snapshot × 24 levels, populations sum to ~1
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 24);
    let total: f64 =
        rows.iter().map(|r| r.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-8, "total population {total}");
    assert!(out.join("populations.gnuplot").exists());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "p1 = 0.5\np2 = 8\ntau_end = 2.0\nbasis_size = 24\n").unwrap();
    let out = dir.path().join("run");
    let o = run(&[
        "ladder",
        "--config", cfg.to_str().unwrap(),
        "--p1", "0.3",
        "--tau0=-4",
        "--out", out.to_str().unwrap(),
    ]);
    assert_exit(&o, 0);
    let manifest = read_json(&out.join("manifest.json"));
    // the flag wins; untouched config keys pass through
    assert_eq!(manifest["config"]["p1"], 0.3);
    assert_eq!(manifest["config"]["p2"], 8.0);
    assert_eq!(manifest["config"]["tau_end"], 2.0);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "p1 = 0.5\np2 = 8\nbogus_knob = 1\n").unwrap();
    let o = run(&[
        "ladder",
        "--config", cfg.to_str().unwrap(),
        "--out", dir.path().join("x").to_str().unwrap(),
    ]);
    assert_exit(&o, 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus_knob"));
}

#[test]
fn missing_required_parameter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["ladder", "--p1", "0.8", "--out", dir.path().join("x").to_str().unwrap()]);
    assert_exit(&o, 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("p2"));
}

#[test]
fn scan_without_a_threshold_bracket_is_a_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    // far below threshold at P2 = 8: every probability ≈ 0
    let o = run(&[
        "scan",
        "--p2", "8",
        "--p1-min", "0.05",
        "--p1-max", "0.15",
        "--points", "3",
        "--out", dir.path().join("x").to_str().unwrap(),
    ]);
    assert_exit(&o, 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bracket"));
}

#[test]
fn scan_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "2"] {
        let out = dir.path().join(format!("w{workers}"));
        let o = run(&[
            "scan",
            "--p2", "8",
            "--p1-min", "0.5",
            "--p1-max", "1.1",
            "--points", "7",
            "--workers", workers,
            "--out", out.to_str().unwrap(),
        ]);
        assert_exit(&o, 0);
        outputs.push((
            std::fs::read(out.join("scurve.csv")).unwrap(),
            std::fs::read(out.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn fixed_frame_harmonic_run_writes_fields_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    // β̄ = ε̄ = 0: pure rotation of a rotation-invariant Gaussian
    let o = run(&[
        "wigner",
        "--frame", "fixed",
        "--alpha-bar", "1",
        "--tau0", "0",
        "--snapshots", "0.5",
        "--half-width", "8",
        "--grid-points", "64",
        "--dt", "0.05",
        "--out", out.to_str().unwrap(),
    ]);
    assert_exit(&o, 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("harmonic rotation-match diagnostic"), "stdout:\n{stdout}");

    assert!(out.join("field_000.csv").exists());
    assert_eq!(read_json(&out.join("field_000.json"))["columns"], "x,u,f");
    let diag = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let last = diag.lines().last().unwrap();
    let mass: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((mass - 1.0).abs() < 1e-6, "interior mass {mass}");
    let drift = read_json(&out.join("summary.json"))["norm_drift"].as_f64().unwrap();
    assert!(drift < 1e-6, "norm drift {drift}");
}

#[test]
fn rotating_frame_rejects_sub_quantum_width() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "wigner",
        "--frame", "rotating",
        "--mu", "0.4",
        "--lambda", "0.2",
        "--sigma-sq", "0.05",
        "--out", dir.path().join("x").to_str().unwrap(),
    ]);
    assert_exit(&o, 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("quantum floor"));
}

#[test]
fn figures_rejects_out_of_range_id() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figures", "--fig", "6", "--out", dir.path().join("x").to_str().unwrap()]);
    assert_exit(&o, 2);
}
