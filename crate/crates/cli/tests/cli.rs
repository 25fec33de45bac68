use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn circrx(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circrx")).arg("--out").arg(out).args(args).output().unwrap()
}

fn ok(args: &[&str], out: &Path) -> Output {
    let o = circrx(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn rows(path: &Path) -> Vec<HashMap<String, String>> {
    csv::Reader::from_path(path).unwrap().deserialize().map(Result::unwrap).collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

fn isolation_at_f0(path: &Path) -> f64 {
    let r = rows(path);
    let row = r.iter().find(|r| num(r, "f_hz") == 750e6).expect("f0 row");
    num(row, "tx_to_bb_isolation_db")
}

#[test]
fn default_sweep_matches_the_closed_form_at_f0() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["sweep"], tmp.path());
    assert!((isolation_at_f0(&tmp.path().join("sweep.csv")) - 23.69).abs() < 0.01);
}

#[test]
fn balancing_the_twin_sweep_opens_a_deep_null() {
    let tmp = tempfile::tempdir().unwrap();
    let open = write(tmp.path(), "open.json", r#"{"params": {"zbal": "open"}}"#);
    let matched = write(tmp.path(), "matched.json", r#"{"params": {"zbal": 50.0}}"#);
    ok(&["--config", open.to_str().unwrap(), "sweep"], &tmp.path().join("a"));
    ok(&["--config", matched.to_str().unwrap(), "sweep"], &tmp.path().join("b"));
    let delta = isolation_at_f0(&tmp.path().join("b/sweep.csv")) - isolation_at_f0(&tmp.path().join("a/sweep.csv"));
    assert!(delta >= 100.0, "{delta}");
}

#[test]
fn touchstone_export_is_ascending() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["sweep"], tmp.path());
    let text = fs::read_to_string(tmp.path().join("tx_ant.s2p")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# HZ S RI R 50"));
    let freqs: Vec<f64> = lines.map(|l| l.split_whitespace().next().unwrap().parse().unwrap()).collect();
    assert_eq!(freqs.len(), 201);
    assert!(freqs.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn malformed_config_leaves_nothing_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.json", "{\"params\": ");
    let out = tmp.path().join("out");
    let o = circrx(&["--config", bad.to_str().unwrap(), "sweep"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_keys_are_named_by_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "cfg.json", r#"{"band": {"f_center": 750e6, "width": 1}}"#);
    let o = circrx(&["--config", cfg.to_str().unwrap(), "balance"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("band.width"), "{err}");
}

#[test]
fn invalid_values_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "cfg.json", r#"{"params": {"rsw": -1.0}}"#);
    let o = circrx(&["--config", cfg.to_str().unwrap(), "noise"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    // the oracle cannot settle in a single period
    let cfg = write(tmp.path(), "cfg.json", r#"{"npath": {"init": "zero", "max_periods": 1}}"#);
    let o = circrx(&["--config", cfg.to_str().unwrap(), "lptv"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn noise_table_carries_the_matched_anchor() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["noise"], tmp.path());
    let r = rows(&tmp.path().join("noise.csv"));
    let row = r.iter().find(|r| num(r, "zbal_ohm") == 50.0).unwrap();
    assert!((num(row, "nf_db") - 3.30).abs() < 0.005);
}

#[test]
fn eq2_check_reports_the_anchors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ok(&["lptv", "eq2-check"], tmp.path());
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("-3.92") && table.contains("-0.22"), "{table}");
    let r = rows(&tmp.path().join("eq2_check.csv"));
    assert_eq!(r.len(), 3);
    assert!(r.iter().all(|r| num(r, "error_db").abs() < 0.1));
}

#[test]
fn link_defaults_give_71_db() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["--format", "json", "link"], tmp.path());
    let v: Value = serde_json::from_slice(&fs::read(tmp.path().join("link.json")).unwrap()).unwrap();
    let budget = v[0]["budget_db"].as_f64().unwrap();
    assert!((budget - 71.0).abs() < 0.05, "{budget}");
}

#[test]
fn manifest_replays_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "cfg.json", r#"{"ptx_dbm": 10.0, "nf_db": 6.0}"#);
    let first = tmp.path().join("first");
    ok(&["--config", cfg.to_str().unwrap(), "--seed", "11", "link"], &first);
    let manifest: Value = serde_json::from_slice(&fs::read(first.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["command"], "link");
    assert_eq!(manifest["resolved_config"]["nf_db"], 6.0);
    assert!(manifest["tool_version"].as_str().unwrap().starts_with("circrx "));

    let second = tmp.path().join("second");
    ok(&["--config", first.join("manifest.json").to_str().unwrap(), "link"], &second);
    for name in ["link.csv", "manifest.json"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
    let o = circrx(&["--config", first.join("manifest.json").to_str().unwrap(), "noise"], &tmp.path().join("third"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn demo_is_byte_identical_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    ok(&["--seed", "3", "demo"], &a);
    ok(&["--seed", "3", "demo"], &b);
    ok(&["--seed", "4", "demo"], &c);
    for name in ["psd_before.csv", "psd_after.csv", "snippet.csv", "metrics.json", "manifest.json"] {
        let x = fs::read(a.join(name)).unwrap();
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
        if name == "snippet.csv" {
            assert_ne!(x, fs::read(c.join(name)).unwrap());
        }
    }
    let m: Value = serde_json::from_slice(&fs::read(a.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(m["recovered"], true);
}
