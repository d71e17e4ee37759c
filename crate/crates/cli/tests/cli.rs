use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lpframes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpframes")).args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn construct_rejects_small_p() {
    let out = lpframes(&["construct", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p > 2"));
}

#[test]
fn strict_mode_needs_a_bound() {
    assert_eq!(lpframes(&["construct", "--mode", "strict"]).status.code(), Some(2));
    assert_eq!(lpframes(&["construct", "--mode", "lenient"]).status.code(), Some(2));
    assert_eq!(lpframes(&["construct", "--grid-h", "0.3"]).status.code(), Some(2));
}

#[test]
fn strict_construction_ends_with_a_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("strict.json");
    let run = lpframes(&["construct", "--mode", "strict", "--ku-bound", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    let report = read_json(&out);
    assert_eq!(report["passed"], Value::Bool(false));
    assert!(report["error"].as_str().unwrap().contains("ladder slots"));
    let plan = &report["entries"][0];
    assert_eq!(plan["name"], "block_plan");
    assert_eq!(plan["status"], "pass");
    assert_eq!(plan["provenance"], "strict");
    assert_eq!(report["tables"]["block_sizes"], serde_json::json!([5184, 10368]));
}

#[test]
fn partition_of_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.json");
    std::fs::write(&pts, "[[0],[1],[10],[11]]").unwrap();
    let out = dir.path().join("p.json");
    let run = lpframes(&["partition", "--t", "5", "--points", pts.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    let report = read_json(&out);
    assert_eq!(report["tables"]["classes"], serde_json::json!([[0, 2], [1, 3]]));
    assert_eq!(lpframes(&["partition", "--points", pts.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"p": 3.0, "count": 4, "seed": 11}"#).unwrap();
    let out = dir.path().join("c.json");
    let run = lpframes(&["constants", "--config", cfg.to_str().unwrap(), "--count", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    let report = read_json(&out);
    assert_eq!(report["config"]["count"], 8);
    assert_eq!(report["config"]["seed"], 11);
    assert!(report["config"].get("out").is_none());
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(lpframes(&["constants", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn compactness_writes_the_tail_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tails.csv");
    let run = lpframes(&["compactness", "--p", "2", "--csv", csv.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,t_n,bound"));
    assert_eq!(text.lines().count(), 22);
    assert!(!text.contains('\r'));
    let stdout: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(stdout["command"], "compactness");
    assert_eq!(stdout["config"]["region"], serde_json::json!([0.0, 10.0]));

    let narrow = lpframes(&["compactness", "--p", "2", "--region", "0,4"]);
    assert_eq!(narrow.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&narrow.stdout).unwrap();
    assert_eq!(report["config"]["region"], serde_json::json!([0.0, 4.0]));
    assert_eq!(lpframes(&["compactness", "--region", "1"]).status.code(), Some(2));
}

#[test]
fn verify_a_frame_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let spec = lpframes::GridSpec::centered(1, 1, 8.0).unwrap();
    let fs: Vec<_> = (0..3)
        .map(|i| lpframes::make_indicator(&spec, &[2.0 * i as f64], &[2.0 * i as f64 + 1.0], 1.0).unwrap())
        .collect();
    let frame = lpframes::FramePair::new(3.0, fs.clone(), fs).unwrap();
    let path = dir.path().join("frame.json");
    std::fs::write(&path, serde_json::to_string(&frame).unwrap()).unwrap();
    let out = dir.path().join("v.json");
    let run = lpframes(&["verify", "--frame", path.to_str().unwrap(), "--r-lower", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_json(&out);
    let names: Vec<_> = report["entries"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap().to_string()).collect();
    assert!(names.contains(&"reconstruction".to_string()));
    assert!(names.contains(&"projection_p1".to_string()));

    let failing = lpframes(&["verify", "--frame", path.to_str().unwrap(), "--r-lower", "2"]);
    assert_eq!(failing.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&failing.stdout).unwrap();
    let bad = report["entries"].as_array().unwrap().iter().find(|e| e["status"] == "fail").unwrap();
    assert!(!bad["witness"].is_null());
}

#[test]
fn empty_report_is_valid() {
    let r = lpframes::Report::new("verify", serde_json::json!({}));
    let v: Value = serde_json::from_str(&r.to_canonical_json()).unwrap();
    assert_eq!(v["entries"], serde_json::json!([]));
    assert_eq!(v["passed"], Value::Bool(true));
}
