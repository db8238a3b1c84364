use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fedosov"))
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("fedosov-cli-{}-{name}.json", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--output", "-"]);
    let out = run(&a);
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

const UNIT_POISSON: &str = r#"{
  "schema": 1, "name": "unit-poisson", "n": 1,
  "ring": { "kind": "poly", "max_degree": 4 },
  "omega_lower": [["0", "-1"], ["1", "0"]],
  "truncation": { "k_min": -2, "k_max": 2, "D": 5 }
}"#;

#[test]
fn star_commutator_is_hbar() {
    let sc = scratch("unit", UNIT_POISSON);
    let v = json(&["star", "--scenario", sc.to_str().unwrap(), "--a", "x1", "--b", "x2"]);
    let comm: Vec<&str> = v["results"]["commutator"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
    assert_eq!(comm[0], "(1) h");
    assert_eq!(v["pass"], true);
}

#[test]
fn star_with_one_echoes() {
    let v = json(&["star", "--scenario", &fixture("flat-r2"), "--a", "1", "--b", "x2^2 - 3*x1"]);
    assert_eq!(v["results"]["a_star_b"], serde_json::json!(["(x2^2 + (-3)*x1)", "+ O(filtration 3)"]));
}

#[test]
fn malformed_expression_exits_two() {
    let out = run(&["star", "--scenario", &fixture("flat-r2"), "--a", "x1 * (x2", "--b", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 8"));
}

#[test]
fn usage_error_exits_two() {
    assert_eq!(run(&["star"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn bad_christoffel_is_rejected_at_load() {
    let sc = scratch(
        "bad-gamma",
        r#"{ "schema": 1, "name": "bad", "n": 1, "ring": { "kind": "poly", "max_degree": 4 },
             "christoffel": { "kind": "components", "entries": [{ "upper": 1, "lower": [1, 2], "value": "x1" }] },
             "truncation": { "k_min": -2, "k_max": 2, "D": 5 } }"#,
    );
    let out = run(&["connection", "--scenario", sc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("torsion"));
}

#[test]
fn non_idempotent_and_non_closed_inputs_are_rejected() {
    let sc = scratch(
        "bad-q",
        r#"{ "schema": 1, "name": "bad-q", "n": 1, "ring": { "kind": "poly", "max_degree": 4 },
             "idempotent": "[[2]]", "truncation": { "k_min": -2, "k_max": 2, "D": 5 } }"#,
    );
    let out = run(&["index-check", "--scenario", sc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q·q ≠ q"));
    let sc = scratch(
        "bad-omega",
        r#"{ "schema": 1, "name": "open", "n": 2, "ring": { "kind": "poly", "max_degree": 2 },
             "omega_h": [{ "forms": [1, 2], "coefficient": "h*x3" }],
             "truncation": { "k_min": -2, "k_max": 2, "D": 5 } }"#,
    );
    let out = run(&["connection", "--scenario", sc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not closed"));
    let sc = scratch(
        "bad-schema",
        r#"{ "schema": 2, "name": "v2", "n": 1, "ring": { "kind": "poly", "max_degree": 4 },
             "truncation": { "k_min": -2, "k_max": 2, "D": 5 } }"#,
    );
    assert_eq!(run(&["connection", "--scenario", sc.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn connection_reports() {
    let flat = json(&["connection", "--scenario", &fixture("flat-r2")]);
    assert_eq!(flat["results"]["r_is_zero"], true);
    assert_eq!(flat["pass"], true);
    let trig = json(&["connection", "--scenario", &fixture("torus-trig")]);
    assert_eq!(trig["results"]["r_is_zero"], false);
    assert_eq!(trig["pass"], true);
    assert_eq!(trig["checks"].as_array().unwrap().len(), 5);
}

#[test]
fn trace_density_of_one() {
    let v = json(&["trace-density", "--scenario", &fixture("flat-r2")]);
    assert_eq!(v["results"]["psi"][0], "(1) h^-1 dx1dx2");
    let v = json(&["trace-density", "--scenario", &fixture("torus-constant"), "--hbar-order", "3"]);
    let avg = &v["results"]["average"]["terms"];
    assert_eq!(avg[0], serde_json::json!({ "hbar": -1, "coeff": "1" }));
    assert_eq!(avg[1], serde_json::json!({ "hbar": 0, "coeff": "-3/7" }));
    let notes: Vec<&str> = v["notes"].as_array().unwrap().iter().map(|n| n.as_str().unwrap()).collect();
    assert!(notes.iter().any(|n| n.starts_with("undetermined at order 2")));
}

#[test]
fn index_check_fixtures_pass() {
    for name in ["flat-r2", "torus-constant", "torus-trig", "torus-gauge-bundle", "poly-gauge"] {
        let out = run(&["index-check", "--scenario", &fixture(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn reports_are_deterministic() {
    let tmp = std::env::temp_dir();
    let a = tmp.join(format!("fedosov-cli-{}-a.json", std::process::id()));
    let b = tmp.join(format!("fedosov-cli-{}-b.json", std::process::id()));
    for p in [&a, &b] {
        let out = run(&["index-check", "--scenario", &fixture("torus-gauge-bundle"), "--output", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(!text.contains("elapsed"));
}

#[test]
fn selftest_passes_and_detects_a_corrupted_epsilon() {
    let ok = run(&["selftest"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = run(&["selftest", "--mutate-eps"]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8_lossy(&bad.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL hochschild-b-tau")));
}

#[test]
fn selftest_reports_missing_fixtures() {
    let out = run(&["selftest", "--fixtures", "/nonexistent-fixture-dir"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("cannot read"));
}
