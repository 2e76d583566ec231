use std::process::{Command, Output};

use serde_json::Value;

fn lfam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfam")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = lfam(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn characters_family_table() {
    let out = lfam(&["--format", "csv", "characters", "--order", "3", "--Q", "6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "q,exponents,order,parity,conductor");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines.iter().skip(1).filter(|l| l.starts_with("7,")).count(), 2);
    assert_eq!(lines.iter().skip(1).filter(|l| l.starts_with("9,")).count(), 2);
}

#[test]
fn eval_reports_both_methods() {
    let v = json(&["eval", "--q", "4", "--chi", "1", "--sigma", "0.5", "--t", "0"]);
    let values = v["result"]["values"].as_array().unwrap();
    let methods: Vec<&str> = values.iter().map(|x| x["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["hurwitz_oracle", "smoothed_afe"]);
    for x in values {
        assert!((x["value"][0].as_f64().unwrap() - 0.6676914571).abs() < 1e-9);
    }
    assert_eq!(v["config"]["seed"], 1);
    assert!(v["wall_time_seconds"].is_number());
    assert!(v["version"].is_string());
}

#[test]
fn zdbounds_contains_second_moment_value() {
    let out = lfam(&["--format", "human", "zdbounds", "--sigma", "0.75", "--Q", "10", "--T", "10"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("21.54"));
}

#[test]
fn exit_codes() {
    assert_eq!(lfam(&["characters", "--frobnicate", "1"]).status.code(), Some(3));
    assert!(String::from_utf8(lfam(&["characters", "--frobnicate", "1"]).stderr).unwrap().contains("Usage"));
    assert_eq!(lfam(&["zdbounds", "--sigma", "1.5", "--Q", "10", "--T", "10"]).status.code(), Some(1));
    assert_eq!(lfam(&["eval", "--q", "4", "--chi", "0", "--method", "afe"]).status.code(), Some(1));
    assert_eq!(lfam(&["--out", "/nonexistent/dir/report.json", "zdbounds", "--sigma", "0.75", "--Q", "10", "--T", "10"]).status.code(), Some(1));
    assert_eq!(lfam(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "sigma = 0.75\nQ = 10\nT = 10\nseed = 42\nno-timing = true\n").unwrap();
    let out = dir.path().join("report.json");
    let status = lfam(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "zdbounds", "--T", "100"]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["result"]["T"], 100.0);
    assert_eq!(v["result"]["Q"], 10.0);
    assert!(v.get("wall_time_seconds").is_none());
}

#[test]
fn seeded_sieve_is_reproducible() {
    let args = ["--no-timing", "--seed", "7", "sieve", "--order", "2", "--Q", "10", "--N", "20", "--T", "4", "--trials", "3"];
    let a = lfam(&args);
    let b = lfam(&[&args[..], &["--workers", "2"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let seeds: Vec<u64> = v["result"]["trials"].as_array().unwrap().iter().map(|t| t["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, [7, 8, 9]);
}

#[test]
fn every_subcommand_runs() {
    let cases: [&[&str]; 9] = [
        &["moment", "--mode", "fixed-t", "--order", "2", "--Q", "10", "--t", "1"],
        &["moment", "--mode", "discrete", "--order", "3", "--Q", "10", "--T", "5"],
        &["hl", "--T", "20"],
        &["sieve", "--mode", "discrete", "--order", "3", "--Q", "10", "--N", "15"],
        &["gallagher", "--q", "5", "--chi", "2", "--T", "5", "--delta", "1", "--function", "poly"],
        &["meanvalue", "--order", "2", "--Q", "10", "--T", "5", "--N", "10"],
        &["zeros", "--mode", "count", "--q", "7", "--chi", "1", "--sigma", "0.6", "--T", "10"],
        &["detector", "--q", "5", "--chi", "1", "--zeros", "1", "--spacing-C", "0"],
        &["lemma31", "--order", "2", "--Q", "10", "--T", "5"],
    ];
    for args in cases {
        for format in ["json", "csv", "human"] {
            let out = lfam(&[&["--format", format], args].concat());
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            assert!(!out.stdout.is_empty());
        }
    }
}
