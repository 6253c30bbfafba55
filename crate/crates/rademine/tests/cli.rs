use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use rademine::record::CSV_HEADER;

fn toy() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/toy.dat").to_str().unwrap().to_owned()
}

fn rademine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rademine")).args(args).output().unwrap()
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["--mode", "hybrid", "--dataset", "x.dat"][..],
        &["--mode", "exact"],
        &["--tfp", "0.5", "--theta", "0.5", "--dataset", "x.dat"],
        &["--dataset", "x.dat", "--sample-size", "10", "--grid", "10:100:2"],
        &["--mode", "exact", "--dataset", "x.dat", "--n", "0"],
    ] {
        let out = rademine(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn missing_file_exits_one() {
    let out = rademine(&["--mode", "stats", "--dataset", "/nonexistent/x.dat"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_mode_passes() {
    let out = rademine(&["--mode", "oracle", "--seed", "4"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = v["details"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn exact_toy_single_draw() {
    let toy = toy();
    let out = rademine(&["--mode", "exact", "--dataset", &toy, "--n", "1", "--bound", "one-mcera", "--seed", "3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dataset"], "toy");
    assert_eq!(v["m"], 3);
    assert_eq!(v["bound_kind"], "thm46_1mcera");
    assert_eq!(v["elapsed_ms"], serde_json::Value::Null);
    let eps = v["epsilon"].as_f64().unwrap();
    assert!((eps - 1.7864776040691008).abs() < 1e-12);
}

#[test]
fn append_keeps_existing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    let p = path.to_str().unwrap();
    let toy = toy();
    let run = |seed: &str| {
        let out = rademine(&[
            "--mode",
            "exact",
            "--dataset",
            &toy,
            "--n",
            "3",
            "--seed",
            seed,
            "--output",
            "csv",
            "--append",
            p,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run("1");
    let first = fs::read(&path).unwrap();
    run("2");
    run("3");
    let all = fs::read(&path).unwrap();
    assert!(all.starts_with(&first));
    let text = String::from_utf8(all).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert_eq!(text.matches("dataset,m,n").count(), 1);
    for (line, seed) in lines[1..].iter().zip(["1", "2", "3"]) {
        assert_eq!(line.split(',').nth(4), Some(seed));
    }
}

#[test]
fn grid_with_repeat_is_ordered() {
    let toy = toy();
    let out =
        rademine(&["--mode", "hybrid", "--beta", "0.5", "--dataset", &toy, "--grid", "10:1000:3", "--repeat", "2"]);
    assert!(out.status.success());
    let rows: Vec<serde_json::Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let keys: Vec<(u64, u64)> = rows.iter().map(|r| (r["m"].as_u64().unwrap(), r["seed"].as_u64().unwrap())).collect();
    assert_eq!(keys, vec![(10, 0), (10, 1), (100, 0), (100, 1), (1000, 0), (1000, 1)]);
}
