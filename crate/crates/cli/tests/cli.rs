use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn meandim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meandim"))
        .args(args)
        .env_remove("MEANDIM_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn carpet_example() {
    let out = meandim(&["carpet", "--a", "3", "--b", "2", "--tuples", "00,11,20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    let h = v["report"]["mdim_h"]["value"].as_f64().unwrap();
    let m = v["report"]["mdim_m"]["value"].as_f64().unwrap();
    assert!((h - 1.3496838201).abs() < 1e-9);
    assert!((m - 1.3690702464).abs() < 1e-9);
    assert_eq!(v["provenance"]["classical"], "formula");
}

#[test]
fn entropy_of_full_shift() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("full2.json");
    fs::write(&spec, r#"{"alphabet": 2, "kind": "full"}"#).unwrap();
    let out = meandim(&["entropy", "--spec", spec.to_str().unwrap(), "--nmax", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["report"]["best_estimate"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-11);
    assert_eq!(v["report"]["counts"][7], "256");
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = meandim(&["oracle", "mass", "--a", "3", "--b", "2", "--tuples", "00,11,20", "--seed", "7", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        fs::read(p).unwrap()
    };
    let (x, y) = (run("a.json"), run("b.json"));
    assert_eq!(x, y);
    let v: Value = serde_json::from_slice(&x).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["schema_version", "command", "passed", "provenance", "report"]);
}

#[test]
fn twelve_significant_digits() {
    let out = meandim(&["weighted-entropy", "--a", "3", "--b", "2", "--tuples", "00,11,20", "--nmax", "3"]);
    let v = json(&out);
    let text = v["report"]["best_estimate"].to_string();
    let digits = text.chars().filter(char::is_ascii_digit).collect::<String>();
    assert!(digits.trim_start_matches('0').len() <= 12, "{text}");
}

#[test]
fn csv_output() {
    let out = meandim(&["--format", "csv", "bm-classical", "--a", "3", "--b", "2", "--tuples", "00,11,20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\nschema_version,1\n"));
    assert!(text.contains("report.gap.equal,false"));
}

#[test]
fn exit_codes() {
    // resource limit
    let out = meandim(&["beta", "--a", "2", "--beta", "2.5", "--N", "9", "--levels", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_meandim"))
        .args(["grid2d", "--preset", "hard-square", "--nmax", "8", "--mmax", "8"])
        .env("MEANDIM_BUDGET", "1e-6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // spec errors
    assert_eq!(meandim(&["carpet", "--a", "3", "--b", "2", "--tuples", "00,19"]).status.code(), Some(4));
    assert_eq!(meandim(&["carpet", "--a", "3", "--b", "2"]).status.code(), Some(4));
    assert_eq!(meandim(&["entropy", "--spec", "/nonexistent.json"]).status.code(), Some(4));
    assert_eq!(meandim(&["no-such-command"]).status.code(), Some(4));
    // assertion failure still writes the report
    let out = meandim(&["oracle", "mass", "--a", "3", "--b", "2", "--tuples", "00,11,20"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn oracle_commands() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    fs::write(&pts, "c1,c2\n0,0\n0.05,0\n0.5,0.5\n1,1\n").unwrap();
    let v = json(&meandim(&["oracle", "cover", "--points", pts.to_str().unwrap(), "--eps", "0.2"]));
    assert_eq!(v["report"]["bounds"]["lower"], 3);
    assert_eq!(v["report"]["bounds"]["exact"], 3);

    let v = json(&meandim(&["oracle", "hdim", "--diams", "0.1,0,0", "--eps", "0.5"]));
    assert_eq!(v["report"]["upper"], 0.0);

    let out = meandim(&["oracle", "qbox", "--a", "3", "--b", "2", "--tuples", "00,11,20", "--N", "2", "--M", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["count"], json(&out)["report"]["formula"]);

    let out = meandim(&["oracle", "appendix-k", "--eps-list", "0.0001", "--sets", "4", "--m", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let d = v["report"]["k_sequence"]["scales"][0]["dimm"].as_f64().unwrap();
    assert!((0.40..=0.60).contains(&d));
    assert_eq!(v["report"]["sets"].as_array().unwrap().len(), 4);
}

#[test]
fn beta_and_grid() {
    let out = meandim(&["beta", "--a", "2", "--beta", "2.5", "--n", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["min_gap"]["exact"], true);
    assert!((v["report"]["dims"]["mdim"].as_f64().unwrap() - 2f64.ln() / 2.5f64.ln()).abs() < 1e-9);

    let out = meandim(&["grid2d", "--preset", "free", "--a", "2", "--nmax", "3", "--mmax", "3"]);
    let v = json(&out);
    assert_eq!(v["report"]["homog"]["mdim"], 1.0);
}

#[test]
fn paper_suite_summary() {
    let out = meandim(&["paper-suite"]);
    let v = json(&out);
    let criteria = v["report"]["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 10);
    let passed = v["report"]["passed"].as_u64().unwrap() as usize;
    assert_eq!(out.status.code(), Some(if passed == 10 { 0 } else { 2 }));
    assert!(criteria.iter().all(|c| c["detail"].is_string()));
}
