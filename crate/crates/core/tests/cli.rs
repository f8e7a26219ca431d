use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roe-index"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("roe-index-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Runs the binary writing its report to a file; returns exit code and report.
fn run(args: &[&str], name: &str) -> (i32, Value) {
    let out = scratch(name);
    let status = bin().args(args).arg("--out").arg(&out).output().unwrap();
    let code = status.status.code().unwrap();
    let text = std::fs::read_to_string(&out).unwrap_or_else(|_| panic!("no report: {}", String::from_utf8_lossy(&status.stderr)));
    (code, serde_json::from_str(&text).unwrap())
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn toeplitz_monomial_three() {
    let (code, r) = run(&["toeplitz", "--symbol", "monomial:k=3"], "toeplitz.json");
    assert_eq!(code, 0);
    assert_eq!(check(&r, "toeplitz_index")["rounded"], -3);
    assert_eq!(check(&r, "toeplitz_kernel_cokernel")["rounded"], -3);
}

#[test]
fn wiener_hopf_negative_beta() {
    let (code, r) = run(&["wiener-hopf", "--alpha", "2", "--beta", "-1"], "wh.json");
    assert_eq!(code, 0);
    assert_eq!(check(&r, "wiener_hopf_index")["rounded"], -1);
}

#[test]
fn spectral_pairing_of_phi_one() {
    let (code, r) = run(&["pairing", "--symbol", "monomial:k=1", "--backend", "spectral"], "pairing.json");
    assert_eq!(code, 0);
    let c = check(&r, "pairing_spectral");
    assert_eq!(c["rounded"], 1);
    assert!(c["residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn lattice_pairing_has_the_opposite_sign() {
    // the lattice converges to +k for the index, so 8 pi i pairing is -1 here
    let (code, r) = run(&["pairing", "--symbol", "monomial:k=1", "--backend", "both"], "both.json");
    assert_eq!(code, 4);
    assert_eq!(check(&r, "pairing_spectral")["pass"], true);
    let l = check(&r, "pairing_lattice");
    assert_eq!(l["pass"], false);
    assert_eq!(l["rounded"], -1);
}

#[test]
fn resolvent_bound_violation_exits_four() {
    let (code, r) = run(&["cylinder", "--symbol", "monomial:k=2"], "cyl.json");
    assert_eq!(code, 4);
    assert_eq!(check(&r, "cylinder_phik_index")["rounded"], -2);
    assert_eq!(check(&r, "resolvent_sup_g")["pass"], false);
    assert_eq!(check(&r, "resolvent_norm")["pass"], true);
}

#[test]
fn usage_errors_exit_two() {
    for args in [&["bogus"][..], &["toeplitz", "--symbol", "nonsense:k=1"], &["winding", "--grid", "x"]] {
        let out = bin().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn reports_are_deterministic_and_sorted() {
    // same config, including the output path
    let (_, mut a) = run(&["winding", "--symbol", "diagonal:ks=2;-1"], "det.json");
    let (_, mut b) = run(&["winding", "--symbol", "diagonal:ks=2;-1"], "det.json");
    a["elapsed_ms"] = Value::Null;
    b["elapsed_ms"] = Value::Null;
    assert_eq!(a, b);
    let text = std::fs::read_to_string(scratch("det.json")).unwrap();
    let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
    assert!(pos("checks") < pos("config") && pos("config") < pos("elapsed_ms") && pos("elapsed_ms") < pos("version"));
}

#[test]
fn config_file_with_flag_override() {
    let cfg = scratch("cfg.json");
    std::fs::write(&cfg, r#"{"symbol": "monomial:k=-2", "grid": 64}"#).unwrap();
    let (code, r) = run(&["toeplitz", "--config", cfg.to_str().unwrap(), "--grid", "128"], "cfg-out.json");
    assert_eq!(code, 0);
    assert_eq!(r["config"]["grid"], 128);
    assert_eq!(check(&r, "toeplitz_index")["rounded"], 2);
}
