//! End-to-end runs of the `entangled` binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entangled"))
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn estimate_three_points() {
    let out = run_with_stdin(
        &["estimate", "--mu0", "2", "--B", "8", "--m", "3"],
        "1\n2\n3\n",
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let est = doc["estimate"].as_f64().unwrap();
    assert!((-6.0..=11.0).contains(&est), "{est}");
    assert_eq!(doc["schedule"]["k"], 3);
}

#[test]
fn estimate_needs_an_initialization() {
    let out = run_with_stdin(&["estimate", "--m", "3"], "1\n2\n3\n");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_rejects_bad_input() {
    let out = run_with_stdin(&["estimate", "--auto-init", "--m", "1"], "x\n1\nnope\n");
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn estimate_trace_is_emitted() {
    let out = run_with_stdin(
        &["estimate", "--mu0", "0", "--B", "4", "--m", "2", "--trace"],
        "0.5\n-0.25\n0.1\n",
    );
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["trace"]["stages"].as_array().unwrap().len(), 3);
}

#[test]
fn empty_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"n_grid": [], "m_rule": {"kind": "fixed", "m": 1}, "estimators": ["mean"],
            "noise": {"kind": "constant", "level": 10}, "trials": 1, "seed": 0}"#,
    )
    .unwrap();
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_field_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"n_grid": [64], "m_rule": {"kind": "fixed", "m": 8}, "estimators": ["mean"],
            "noise": {"kind": "constant", "level": 10}, "trials": 2, "seed": 0, "trails": 3}"#,
    )
    .unwrap();
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"n_grid": [64, 128], "m_rule": {"kind": "proportional", "c": 0.5},
            "estimators": ["iter_trunc", "median"], "noise": {"kind": "pareto_tail", "scale": 2, "shape": 1.5},
            "trials": 5, "seed": 3}"#,
    )
    .unwrap();
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("n,m,estimator,trials"));
    assert_eq!(lines.len(), 5);
}

#[test]
fn verify_toolbox_reports_bound_warnings_only_on_stderr() {
    let out = bin()
        .args(["verify-toolbox", "--draws", "20"])
        .output()
        .unwrap();
    // closed forms all match quadrature, so the exit status is clean
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 1 + 20 * 11);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("220 of 220"));
}

#[test]
fn verify_toolbox_rejects_zero_draws() {
    let out = bin()
        .args(["verify-toolbox", "--draws", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lowerbound_row_and_validation() {
    let out = bin()
        .args([
            "--seed",
            "4",
            "lowerbound",
            "--case",
            "2",
            "--n",
            "2000",
            "--m",
            "40",
            "--trials",
            "50",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);

    let bad = bin()
        .args(["lowerbound", "--case", "3", "--n", "100"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let bad_m = bin()
        .args(["lowerbound", "--case", "1", "--n", "100", "--m", "100"])
        .output()
        .unwrap();
    assert_eq!(bad_m.status.code(), Some(2));
}

#[test]
fn generate_then_estimate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    let inst = dir.path().join("i.json");
    let out = bin()
        .args([
            "--seed",
            "11",
            "generate",
            "--n",
            "2000",
            "--m",
            "600",
            "--mu-star",
            "-3",
            "--noise-level",
            "1e4",
        ])
        .arg("--samples-out")
        .arg(&samples)
        .arg("--instance-out")
        .arg(&inst)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(&inst).unwrap()).unwrap();
    assert_eq!(meta["sigmas"].as_array().unwrap().len(), 2000);

    let est = bin()
        .args(["estimate", "--auto-init", "--m", "600", "--input"])
        .arg(&samples)
        .output()
        .unwrap();
    assert!(
        est.status.success(),
        "{}",
        String::from_utf8_lossy(&est.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&est.stdout).unwrap();
    let e = doc["estimate"].as_f64().unwrap();
    assert!((e + 3.0).abs() < 1.0, "{e}");
}
