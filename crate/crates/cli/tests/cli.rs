//! End-to-end runs of the `wpir` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn wpir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn eval_reports_the_private_point() {
    let output = wpir(&["eval", "--scheme", "scheme1", "--M", "2", "--n", "2", "--p", "0.5"]);
    let report = stdout_json(&output);
    assert_eq!(report["scheme"], "scheme1");
    let rate = report["tuple"]["rate"].as_f64().unwrap();
    assert!((rate - 2.0 / 3.0).abs() < 1e-9);
    assert_eq!(report["tuple"]["leakage_mi"], 0.0);
    assert_eq!(report["source"]["rate"], "closed-form");
}

#[test]
fn eval_sphere_and_partition_points() {
    let output = wpir(&["eval", "--scheme", "scheme2-sphere", "--M", "32", "--w", "0"]);
    let report = stdout_json(&output);
    let wil = report["tuple"]["leakage_wil"].as_f64().unwrap();
    assert!((wil - 5.0).abs() < 1e-9);

    let output = wpir(&[
        "eval", "--scheme", "scheme1-partition", "--M", "32", "--eta", "4", "--normalize",
    ]);
    let report = stdout_json(&output);
    let rate = report["tuple"]["rate"].as_f64().unwrap();
    assert!((rate - 0.501960784314).abs() < 1e-9);
    assert!(report["normalized"].is_object());
}

#[test]
fn eval_rejects_bad_requests() {
    // unknown scheme id
    let output = wpir(&["eval", "--scheme", "scheme3", "--M", "2", "--p", "0.5"]);
    assert!(!output.status.success());

    // missing parameter for the chosen family
    let output = wpir(&["eval", "--scheme", "scheme1", "--M", "2"]);
    assert!(!output.status.success());

    // eta must divide M
    let output = wpir(&[
        "eval", "--scheme", "scheme1-partition", "--M", "4", "--eta", "3",
    ]);
    assert!(!output.status.success());
}

#[test]
fn sweep_writes_stable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path: PathBuf = dir.path().join("curve.csv");
    let args = [
        "sweep", "--scheme", "scheme1", "--M", "2", "--p-grid", "0:0.5:0.1",
        "--metric", "wil", "--out",
    ];
    let mut full: Vec<&str> = args.to_vec();
    let path_str = path.to_str().unwrap();
    full.push(path_str);

    let output = wpir(&full);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let first = std::fs::read(&path).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with(
        "scheme,M,n,eta,param,R,U,delta,rho_mi,rho_wil,R_norm,U_norm,delta_norm,rho_mi_norm,rho_wil_norm\n"
    ));
    assert_eq!(text.lines().count(), 7);

    // second run produces identical bytes
    let output = wpir(&full);
    assert!(output.status.success());
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn sweep_requires_exactly_one_grid() {
    let output = wpir(&["sweep", "--scheme", "scheme1", "--M", "2", "--out", "/tmp/x.csv"]);
    assert!(!output.status.success());

    let output = wpir(&[
        "sweep", "--scheme", "scheme1", "--M", "2", "--p-grid", "0:0.5:0.1",
        "--w-grid", "0:2:1", "--out", "/tmp/x.csv",
    ]);
    assert!(!output.status.success());
}

#[test]
fn sweep_rejects_unwritable_paths() {
    let output = wpir(&[
        "sweep", "--scheme", "scheme1", "--M", "2", "--p-grid", "0:0.5:0.1",
        "--out", "/nonexistent-dir/out.csv",
    ]);
    assert!(!output.status.success());
}

#[test]
fn verify_exits_zero_on_a_correct_build() {
    let output = wpir(&["verify", "--suite", "theorems", "--max-m", "4"]);
    let report = stdout_json(&output);
    assert_eq!(report["failed"], 0);
    assert_eq!(report["pass"], true);
    assert!(!report["checks"].as_array().unwrap().is_empty());

    let output = wpir(&["verify", "--suite", "timeshare"]);
    assert!(output.status.success());
}

#[test]
fn verify_retrievability_small() {
    let output = wpir(&[
        "verify", "--suite", "retrievability", "--max-m", "2", "--seed", "3",
    ]);
    let report = stdout_json(&output);
    assert_eq!(report["failed"], 0);
    for check in report["checks"].as_array().unwrap() {
        assert_eq!(check["metric"], "success_rate");
        assert_eq!(check["observed"], 1.0);
    }
}
