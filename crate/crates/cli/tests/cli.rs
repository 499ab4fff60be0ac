//! End-to-end runs of the `compopt` binary.

use std::fs;
use std::process::{Command, Output};

fn compopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compopt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Path graph 0 → 1 → 2 with unit supply at 0 and unit demand at 2.
const PATH_NETWORK: &str = r#"{
  "V": 3, "E": 2, "src": [0, 1], "tgt": [1, 2],
  "costs": [{"type": "quadratic", "a": 1.0, "b": 0.0}, {"type": "quadratic", "a": 2.0, "b": 0.5}],
  "balance": [1.0, 0.0, -1.0]
}"#;

#[test]
fn bench_writes_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let o = compopt(&["bench", "--nodes", "8", "--seed", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mode,nodes,p,seed,iters,wall_ms,residual,final_dual_value,lambda_discrepancy");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("standard,8,") && lines[2].starts_with("hierarchical,8,"));
}

#[test]
fn bench_sweep_covers_every_seed() {
    let o = compopt(&["bench", "--sweep", "p", "--nodes", "6", "--seeds", "2", "--mode", "hierarchical"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Ten edge probabilities, two seeds each, one mode.
    assert_eq!(stdout(&o).lines().count(), 1 + 20);
}

#[test]
fn bench_rejects_too_few_nodes() {
    let o = compopt(&["bench", "--nodes", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_path_network() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    fs::write(&net, PATH_NETWORK).unwrap();
    let o = compopt(&["solve", net.to_str().unwrap(), "--gamma", "0.3", "--tol", "1e-9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // Conservation forces one unit through both edges.
    for f in v["flows"].as_array().unwrap() {
        assert!((f.as_f64().unwrap() - 1.0).abs() < 1e-8);
    }
    assert!(v["converged"].as_bool().unwrap());
}

#[test]
fn validate_detects_file_kind() {
    let dir = tempfile::tempdir().unwrap();
    let good_uwd = dir.path().join("d.json");
    fs::write(&good_uwd, r#"{"boxes":[2,1],"junctions":2,"inner_map":[0,1,1],"outer_map":[0]}"#).unwrap();
    let bad_uwd = dir.path().join("bad.json");
    fs::write(&bad_uwd, r#"{"boxes":[2],"junctions":1,"inner_map":[0,3],"outer_map":[]}"#).unwrap();
    let net = dir.path().join("n.json");
    fs::write(&net, PATH_NETWORK).unwrap();
    let unbalanced = dir.path().join("u.json");
    fs::write(&unbalanced, PATH_NETWORK.replace("-1.0", "-2.0")).unwrap();

    assert!(compopt(&["validate", good_uwd.to_str().unwrap()]).status.success());
    assert!(compopt(&["validate", net.to_str().unwrap()]).status.success());
    assert_eq!(compopt(&["validate", bad_uwd.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(compopt(&["validate", unbalanced.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn naturality_suites_pass() {
    let o = compopt(&["naturality", "--instances", "5", "--iters", "20"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 3 + 5);
}
