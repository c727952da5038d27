use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splinegram"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("splinegram-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gram_of_linear_bernstein_basis() {
    let out = run(&["gram", "--order", "2", "--spec", "uniform:0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["n"], 2);
    assert_eq!(v["bandwidth"], 1);
    assert_eq!(v["entries"][0], serde_json::json!([1, 1, "1/3"]));
    assert_eq!(v["entries"][1], serde_json::json!([1, 2, "1/6"]));
}

#[test]
fn gram_bandwidth_follows_order() {
    let out = run(&["gram", "--order", "5", "--spec", "uniform:3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["bandwidth"], 4);
    assert_eq!(v["n"], 8);
}

#[test]
fn partition_file_with_rational_strings() {
    let path = scratch("half.json");
    std::fs::write(&path, r#"{"order": 2, "interior": ["1/2"]}"#).unwrap();
    let spec = format!("file:{}", path.display());
    let out = run(&["gram", "--spec", &spec]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["entries"][0], serde_json::json!([1, 1, "1/6"]));
    assert_eq!(v["entries"][1], serde_json::json!([1, 2, "1/12"]));
}

#[test]
fn verify_single_linear_instance() {
    let out = run(&["verify", "--order", "2", "--spec", "uniform:1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let b_nn: Vec<&str> = v["b_nn"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert!(b_nn.contains(&"24/7"));
    assert_eq!(v["K"], "36/5");
}

#[test]
fn uncertified_order_sweep_passes() {
    let out = run(&["verify", "--order", "4", "--trials", "3", "--max-m", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["uncertified"], true);
    assert!(v["empirical_gamma_max"].as_f64().is_some());
}

#[test]
fn float_sweep_writes_csv() {
    let csv = scratch("sweep.csv");
    let out = run(&[
        "verify",
        "--order",
        "3",
        "--mode",
        "float",
        "--trials",
        "5",
        "--max-m",
        "30",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("trial,m,worst_ratio,pass"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn certify_exit_codes() {
    let ok = run(&["certify", "psi_from_phi", "--samples", "50"]);
    assert_eq!(ok.status.code(), Some(0));
    let starved = run(&["certify", "phi_step", "--budget", "10"]);
    assert_eq!(starved.status.code(), Some(2));
    let unknown = run(&["certify", "no_such_thing"]);
    assert_eq!(unknown.status.code(), Some(3));
}

#[test]
fn input_errors_exit_with_three() {
    assert_eq!(
        run(&["gram", "--order", "2", "--spec", "bogus"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        run(&["gram", "--order", "3", "--spec", "file:/nonexistent/p.json"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(
        run(&["verify", "--order", "3", "--mode", "fuzzy"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn gen_is_deterministic_and_round_trips() {
    let a = run(&["gen", "--order", "3", "--spec", "random:5:6"]);
    let b = run(&["gen", "--order", "3", "--spec", "random:5:6"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let path = scratch("gen.json");
    let out = run(&[
        "gen",
        "--order",
        "3",
        "--spec",
        "random:5:6",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let spec = format!("file:{}", path.display());
    let inv = run(&["invert", "--spec", &spec, "--history"]);
    assert_eq!(inv.status.code(), Some(0));
    let again = run(&["invert", "--spec", &spec, "--history"]);
    assert_eq!(inv.stdout, again.stdout);
}
