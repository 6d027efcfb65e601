// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdwbs"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(name)).unwrap()).unwrap()
}

fn simulate(dir: &Path, scenario: &str, seed: &str) {
    ok(
        dir,
        &["simulate", "--scenario", scenario, "--T", "150", "--p", "10", "--seed", seed, "--out", "d.csv", "--truth", "t.json"],
    );
}

#[test]
fn simulate_writes_data_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "1", "1");
    let truth = json(dir.path(), "t.json");
    assert_eq!(truth["change_points"], serde_json::json!([51, 101]));
    assert_eq!(truth["T"], 150);
    assert_eq!(truth["p"], 10);
    assert_eq!(truth["scenario"], 1);
    assert_eq!(truth["schema"], 1);
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(csv.lines().count(), 150);
    assert!(csv.lines().all(|l| l.split(',').count() == 10));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bad_scenario = run(d, &["simulate", "--scenario", "6", "--T", "150", "--p", "10", "--out", "x", "--truth", "y"]);
    assert_eq!(bad_scenario.status.code(), Some(1));
    let bad_len = run(d, &["simulate", "--scenario", "1", "--T", "100", "--p", "10", "--out", "x", "--truth", "y"]);
    assert_eq!(bad_len.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_len.stderr).contains("multiple of 3"));
    assert!(bad_len.stdout.is_empty());
    let odd_dim = run(d, &["simulate", "--scenario", "1", "--T", "150", "--p", "3", "--out", "x", "--truth", "y"]);
    assert_eq!(odd_dim.status.code(), Some(1));
    assert_eq!(run(d, &["bench", "--scenario", "7"]).status.code(), Some(1));
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(1));
    simulate(d, "1", "1");
    assert_eq!(run(d, &["detect", "--input", "d.csv", "--tau", "NaN"]).status.code(), Some(1));
    assert_eq!(run(d, &["detect", "--input", "d.csv", "--h", "-2"]).status.code(), Some(1));
    assert_eq!(run(d, &["detect", "--input", "d.csv", "--kernel", "cosine"]).status.code(), Some(1));
    assert_eq!(run(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let missing = run(d, &["detect", "--input", "nope.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());
    std::fs::write(d.join("bad.csv"), "1,2\n3\n").unwrap();
    assert_eq!(run(d, &["detect", "--input", "bad.csv"]).status.code(), Some(2));
    std::fs::write(d.join("nan.csv"), "1,2\nNaN,3\n").unwrap();
    assert_eq!(run(d, &["detect", "--input", "nan.csv"]).status.code(), Some(2));
}

#[test]
fn detect_modes_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "1", "1");
    ok(d, &["detect", "--input", "d.csv", "--seed", "1", "--out", "r.json"]);
    let r = json(d, "r.json");
    assert_eq!(r["schema"], 1);
    let k = r["change_points"].as_array().unwrap().len();
    assert!((1..=3).contains(&k));
    assert!(r["path"].as_array().unwrap().iter().all(|e| e["b"].is_u64() && e["a"].is_f64()));
    let m = &r["manifest"];
    assert_eq!(m["command"], "detect");
    assert_eq!(m["config"]["segmenter"]["intervals"], 50);
    assert_eq!(m["config"]["selector"]["directions"], 200);
    assert_eq!(m["config"]["selector"]["alpha"], 0.0005);
    assert_eq!(m["config"]["segmenter"]["kernel"], "gaussian");
    assert!(m["bandwidth"].as_f64().unwrap() > 0.0);
    assert!(m["version"].is_string() && m["wall_time_s"].is_f64());

    let huge = ok(d, &["detect", "--input", "d.csv", "--tau", "1e9"]);
    let v: Value = serde_json::from_slice(&huge.stdout).unwrap();
    assert_eq!(v["change_points"], serde_json::json!([]));
    assert!(v.get("selection").is_none());

    ok(d, &["detect", "--from-manifest", "r.json", "--out", "again.json"]);
    let mut a = json(d, "again.json");
    let mut b = r.clone();
    for v in [&mut a, &mut b] {
        v["manifest"].as_object_mut().unwrap().remove("wall_time_s");
    }
    assert_eq!(a, b);

    let fixed = ok(d, &["detect", "--input", "d.csv", "--h", "3.5", "--kernel", "epanechnikov", "--M", "20", "--N", "50"]);
    let v: Value = serde_json::from_slice(&fixed.stdout).unwrap();
    assert_eq!(v["manifest"]["bandwidth"], 3.5);
    assert_eq!(v["manifest"]["config"]["segmenter"]["kernel"], "epanechnikov");
}

#[test]
fn evaluate_against_truth() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "1", "1");
    std::fs::write(d.join("same.json"), r#"{"change_points":[51,101]}"#).unwrap();
    std::fs::write(d.join("empty.json"), r#"{"change_points":[]}"#).unwrap();
    std::fs::write(d.join("shift.json"), r#"{"change_points":[49,105]}"#).unwrap();
    ok(d, &["evaluate", "--result", "same.json", "--truth", "t.json", "--out", "e1.json"]);
    let e = json(d, "e1.json");
    assert_eq!((e["count_error"].clone(), e["d_est_given_true"].clone(), e["d_true_given_est"].clone()), (0.into(), 0.into(), 0.into()));
    let out = ok(d, &["evaluate", "--result", "empty.json", "--truth", "t.json"]);
    let e: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(e["count_error"], 2);
    assert_eq!(e["d_est_given_true"], "inf");
    assert_eq!(e["d_true_given_est"], "-inf");
    let out = ok(d, &["evaluate", "--result", "shift.json", "--truth", "t.json"]);
    let e: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(e["d_est_given_true"], 4);
    assert_eq!(e["d_true_given_est"], 4);
    assert_eq!(run(d, &["evaluate", "--result", "missing.json", "--truth", "t.json"]).status.code(), Some(2));
}

#[test]
fn bench_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(d, &["bench", "--scenario", "1,4", "--T", "90", "--p", "4", "--reps", "1", "--seed", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,scenario,T,p,reps,mean_abs_k_error,median_d_est_given_true,median_d_true_given_est,mean_wall_time_s"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][..5], &["MNP", "1", "90", "4", "1"]);
    assert_eq!(rows[1][1], "4");

    ok(d, &["bench", "--scenario", "3", "--T", "60", "--p", "2", "--reps", "2", "--exact-tau-audit", "--out", "b.csv"]);
    let text = std::fs::read_to_string(d.join("b.csv")).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",path_exact_discrepancy"));
    let last: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&last));
}
