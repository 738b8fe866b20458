//! End-to-end runs of the `oscint` binary.

use std::process::{Command, Output};

fn oscint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscint"))
        .args(args)
        .env_remove("OSCINT_TOL")
        .env_remove("OSCINT_PRECISION")
        .env_remove("OSCINT_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn odd_monomial_gives_pi_over_d() {
    let out = oscint(&["pvint", "--monomial", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out)["value"].as_f64().unwrap();
    assert!((v - std::f64::consts::PI / 3.0).abs() < 1e-8);
}

#[test]
fn even_monomial_vanishes() {
    let out = oscint(&["pvint", "--monomial", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["value"].as_f64().unwrap().abs() <= 1e-8);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(oscint(&["pvint", "--bogus"]).status.code(), Some(2));
    assert_eq!(oscint(&["pvint"]).status.code(), Some(2));
    assert_eq!(
        oscint(&["--tol", "0", "pvint", "--monomial", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        oscint(&["sublevel", "--poly", "/no/such/file", "--alpha", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn tolerance_falls_back_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_oscint"))
        .args(["pvint", "--monomial", "3"])
        .env("OSCINT_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tol"));
}

#[test]
fn failed_precondition_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, r#"{"degree":3,"coeffs":["0","1","0","1"]}"#).unwrap();
    let p = path.to_str().unwrap();
    let out = oscint(&[
        "vdc", "--k", "2", "--lambda", "100", "--poly", p, "--a", "-1", "--b", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn construct_and_trace_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p3.json");
    let p = path.to_str().unwrap();
    let out = oscint(&["construct", "--n", "3", "--output", p]);
    assert_eq!(out.status.code(), Some(0));
    let desc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(desc["degree"], 17);
    assert_eq!(desc["c_k"], "230945/262144");
    assert_eq!(desc["a_k"], desc["coeffs"][17]);

    let out = oscint(&["upperbound-trace", "--poly", p]);
    assert_eq!(out.status.code(), Some(0));
    // Nominal degrees 32, 16, 8, 4, 2, 1: five halvings for degree 17.
    let trace = json(&out);
    let mut node = &trace["recursion_child"];
    let mut depth = 0;
    while !node.is_null() {
        depth += 1;
        node = &node["recursion_child"];
    }
    assert_eq!(depth, 5);
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = oscint(&["sweep", "--n-min", "3", "--n-max", "4", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("n,d,I_Pn,I_fn,D_n,ratio_logd,tol,runtime_ms"));
    assert!(dir.path().join("sweep.json").exists());
}

#[test]
fn csv_format_flattens_scalars() {
    let out = oscint(&["--format", "csv", "pvint", "--monomial", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "abs_error_est,converged,lobe_count,truncation_radius,value"
    );
    assert_eq!(lines.count(), 1);
}

#[test]
fn selftest_single_criterion() {
    let out = oscint(&["selftest", "--criterion", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("criterion 4 [PASS]"));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn conv_form_writes_decimal_coefficients() {
    let out = oscint(&["construct", "--n", "2", "--form", "conv"]);
    assert_eq!(out.status.code(), Some(0));
    let desc = json(&out);
    assert_eq!(desc["degree"], 7);
    let c1: f64 = desc["coeffs"][1].as_str().unwrap().parse().unwrap();
    assert!(c1.is_finite() && c1 != 0.0);
}

#[test]
fn sweep_without_directory_is_usage_error() {
    let out = oscint(&["sweep", "--n-min", "3", "--n-max", "4"]);
    assert_eq!(out.status.code(), Some(2));
}
