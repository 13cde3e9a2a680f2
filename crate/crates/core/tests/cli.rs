use std::path::Path;
use std::process::{Command, Output};

use qacspec::channel::{choi_of_replacement, write_choi_file, ChoiRep};
use qacspec::circuit::write_circuit;
use qacspec::linalg::ComplexMatrix;
use qacspec::QacCircuit;
use serde_json::Value;

fn qacspec(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qacspec"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exact_learning_of_identity_channel() {
    let dir = tempfile::tempdir().unwrap();
    let out = qacspec(
        dir.path(),
        &["--seed", "1", "--k", "2", "learn", "--oracle", "exact", "--channel", "identity:1"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("learn.json"));
    assert!(report["error_post"].as_f64().unwrap() <= 1e-6);
    assert!(dir.path().join("estimates.csv").exists());
    assert!(dir.path().join("phi_rounded.choi").exists());
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["subcommand"], "learn");
    assert_eq!(manifest["seed"], 1);
}

#[test]
fn spectrum_profile_of_cz_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = QacCircuit::new(2);
    c.cz(vec![0, 1]);
    let path = dir.path().join("cz.json");
    write_circuit(&c, &path).unwrap();
    let out = qacspec(dir.path(), &["--seed", "0", "spectrum", "--circuit", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let spectrum = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let identity_row = spectrum.lines().nth(1).unwrap();
    let coeff: f64 = identity_row.split(',').nth(2).unwrap().parse().unwrap();
    let profile = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let first = profile.lines().nth(1).unwrap();
    let fields: Vec<&str> = first.split(',').collect();
    assert_eq!(fields[0], "0");
    let w0: f64 = fields[1].parse().unwrap();
    assert!((w0 - coeff * coeff).abs() < 1e-15);
    assert!((w0 - 0.25).abs() < 1e-15);
}

#[test]
fn validate_reports_cptp_and_rejects_non_cptp() {
    let dir = tempfile::tempdir().unwrap();
    let phi = choi_of_replacement(1, &ComplexMatrix::identity(2).scale(0.5)).unwrap();
    let good = dir.path().join("good.choi");
    write_choi_file(&phi, &good, 1e-6).unwrap();
    let out = qacspec(dir.path(), &["validate", "--choi", good.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(json(&dir.path().join("validate.json"))["ok"], true);

    let bad = ChoiRep::new(1, 1, phi.matrix().scale(2.0)).unwrap();
    let path = dir.path().join("bad.choi");
    std::fs::write(&path, qacspec::channel::choi_to_bytes(&bad)).unwrap();
    let out = qacspec(dir.path(), &["validate", "--choi", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&dir.path().join("validate.json"))["ok"], false);
}

#[test]
fn errors_are_reported_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = qacspec(dir.path(), &["--seed", "0", "spectrum", "--q", "20"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string());
    assert!(err["message"].is_string());

    let out = qacspec(dir.path(), &["--seed", "0", "learn", "--choi", "/nonexistent/x.choi"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string());

    let out = qacspec(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn correlation_run_respects_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = qacspec(
        dir.path(),
        &["--seed", "3", "correlate", "--f", "parity", "--n", "4", "--trials", "5"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("correlate.json"));
    assert_eq!(report["summary"]["trials"], 5);
    assert_eq!(report["summary"]["proof_bound_violations"], 0);
    for r in report["reports"].as_array().unwrap() {
        let a = r["agreement"].as_f64().unwrap();
        assert!(a <= r["proof_bound"].as_f64().unwrap() + 1e-12);
        assert!((a - r["agreement_from_spectra"].as_f64().unwrap()).abs() < 1e-9);
    }
}

#[test]
fn correlate_accepts_hex_truth_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = qacspec(dir.path(), &["--seed", "3", "correlate", "--f", "n=3:69", "--n", "3", "--trials", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = qacspec(dir.path(), &["--seed", "3", "correlate", "--f", "n=3:69", "--n", "4", "--trials", "2"]);
    assert_eq!(out.status.code(), Some(1));
}
