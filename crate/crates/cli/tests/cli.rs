use std::process::{Command, Output};

use serde_json::Value;

fn mskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mskit")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

const Z2: &str = r#"{ "constant": [1, 0], "zeros": [ { "point": [0, 0], "mult": 2 } ] }"#;
const HALF: &str = r#"{ "constant": [1, 0], "zeros": [ { "point": [0.5, 0], "mult": 1 }, { "point": [0, 0], "mult": 1 } ] }"#;

#[test]
fn gcd_and_lcm() {
    let out = mskit(&["gcd", Z2, HALF]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["gcd"]["zeros"].as_array().unwrap().len(), 1);
    assert_eq!(v["gcd"]["zeros"][0]["mult"], 1);
    let lcm_degree: u64 = v["lcm"]["zeros"].as_array().unwrap().iter().map(|z| z["mult"].as_u64().unwrap()).sum();
    assert_eq!(lcm_degree, 3);
}

#[test]
fn blaschke_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("theta.json");
    std::fs::write(&path, Z2).unwrap();
    let out = mskit(&["basis", "--theta", path.to_str().unwrap(), "--samples", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["dim"], 2);
    assert!(v["gram_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["samples"].as_array().unwrap().len(), 2);
}

#[test]
fn atto_identity_symbol() {
    let out = mskit(&["atto", "--theta", HALF, "--alpha", HALF, "--phi", "[[0, 1, 0]]"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["norm"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn intertwine_dimension_is_gcd_degree() {
    let out = mskit(&["intertwine", "--theta", Z2, "--alpha", HALF]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["dimension"], 1);
    assert_eq!(v["gcd_degree"], 1);
    assert!(v["solutions"][0]["membership_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn dual_reports_classification() {
    let out = mskit(&["dual", "--theta", HALF, "--alpha", Z2, "--phi", "[[1, 1, 0]]", "--window", "-256,256,64"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["classification"]["class"].is_string());
    assert!(v["block_norms"]["t_check"].as_f64().unwrap() > 0.5);
}

#[test]
fn check_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = mskit(&["check", "thm-inter", "--seed", "3", "--trials", "5", "--deg", "1..3", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema"], "mskit-report/1");
    assert_eq!(v["theorem_id"], "thm-inter");
    assert_eq!(v["trials"].as_array().unwrap().len(), 5);
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn impossible_tolerance_fails() {
    let out = mskit(&["check", "eq-3.2", "--trials", "2", "--tol", "identity=1e-30"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["check", "no-such-theorem"],
        vec!["check", "thm-inter", "--deg", "3"],
        vec!["check", "thm-inter", "--deg", "5..2"],
        vec!["check", "thm-inter", "--tol", "bogus=1"],
        vec!["check", "thm-inter", "--trials", "0"],
        vec!["gcd", "{\"constant\": [1, 0], \"zeros\": [{\"point\": [2, 0], \"mult\": 1}]}", Z2],
        vec!["frobnicate"],
    ] {
        assert_eq!(mskit(&args).status.code(), Some(2), "{args:?}");
    }
}
