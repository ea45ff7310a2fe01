use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_ratings-market");

const FIG1: &str = "delta = 0.1\nalpha = 0.1\nu_high = 2\nu_low = 1\nprice = 1\nk = 0.8828\nbuyer_mass = 1\n";
const FIG3: &str = "# reference values\ndelta = 0.2\nalpha = 0.5\nu_high = 3\nu_low = 1\nprice = 1.5\nk = 0.8204\nbuyer_mass = 0.08\n";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_inside_interval_lists_discriminatory() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "fig3.cfg", FIG3);
    let report = json(&run(&["solve", "--config", s(&cfg)]));
    let eqs = report["equilibria"].as_array().unwrap();
    assert!(eqs.iter().any(|e| e["kind"] == "Discriminatory"));
    for e in eqs {
        assert!(e["stability"] == "Stable" || e["stability"] == "Unstable");
        let g = &e["groups"];
        assert!((g[0]["u_g"].as_f64().unwrap() - g[1]["u_b"].as_f64().unwrap()).abs() < 1e-8);
    }
}

#[test]
fn solve_no_trade() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "nt.cfg", &FIG1.replace("price = 1", "price = 1.6"));
    let report = json(&run(&["solve", "--config", s(&cfg)]));
    let eqs = report["equilibria"].as_array().unwrap();
    assert_eq!(eqs.len(), 1);
    assert_eq!(eqs[0]["kind"], "NoTrade");
    assert_eq!(eqs[0]["stability"], "NotAssessed");
}

#[test]
fn solve_rejects_bad_config() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "bad.cfg", &FIG3.replace("k = 0.8204", "k = 1.2"));
    let out = run(&["solve", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`k`"));
    let out = run(&["solve", "--config", "/nonexistent/x.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_reports_regime_error() {
    let dir = TempDir::new().unwrap();
    let text = "delta = 1\nalpha = 0.1\nu_high = 2\nu_low = 1\nprice = 1\nk = 0.9121\nbuyer_mass = 1\n";
    let cfg = config(&dir, "fig2.cfg", text);
    let out = run(&["solve", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn json_config_and_out_dir() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "fig3.json",
        r#"{"delta":0.2,"alpha":0.5,"u_high":3,"u_low":1,"price":1.5,"k":0.8204,"buyer_mass":0.08}"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&["thresholds", "--config", s(&cfg), "--out", s(&out_dir)]);
    assert!(out.status.success());
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("thresholds.json")).unwrap()).unwrap();
    assert!((v["k_threshold"].as_f64().unwrap() - 0.7887).abs() < 1e-4);
}

#[test]
fn thresholds() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "fig1.cfg", FIG1);
    let v = json(&run(&["thresholds", "--config", s(&cfg)]));
    assert!((v["k_threshold"].as_f64().unwrap() - 0.8536).abs() < 1e-4);

    let cfg = config(&dir, "fig3.cfg", FIG3);
    let v = json(&run(&["thresholds", "--config", s(&cfg)]));
    assert!((v["k_threshold"].as_f64().unwrap() - 0.7887).abs() < 1e-4);
    let (ql, qu) = (v["q_lower"].as_f64().unwrap(), v["q_upper"].as_f64().unwrap());
    assert!(0.0 < ql && ql < qu);

    let cfg = config(&dir, "mono.cfg", &FIG3.replace("k = 0.8204", "k = 0.6"));
    let v = json(&run(&["thresholds", "--config", s(&cfg)]));
    assert!(v["q_lower"].is_null() && v["q_upper"].is_null());
    assert_eq!(v["reasons"]["q_lower"], "u_G monotone (k ≤ k̲)");
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().to_string())
        .collect()
}

#[test]
fn scan_beta_hump() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "fig3.cfg", FIG3);
    let out = run(&["scan", "--config", s(&cfg), "--grid", "beta=0.01:100:33:log"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let counts: Vec<usize> = column(&csv, "n_discriminatory")
        .iter()
        .map(|c| c.parse().unwrap())
        .collect();
    let positive: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
    assert!(!positive.is_empty());
    let (first, last) = (positive[0], *positive.last().unwrap());
    assert!(first > 0 && last < counts.len() - 1);
    assert!((first..=last).all(|i| counts[i] > 0));
}

#[test]
fn scan_below_threshold_and_single_point() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "mono.cfg", &FIG3.replace("k = 0.8204", "k = 0.75"));
    let out = run(&["scan", "--config", s(&cfg), "--grid", "Q=0.01:0.3:12"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(column(&csv, "n_discriminatory").iter().all(|c| c == "0"));

    let out = run(&["scan", "--config", s(&cfg), "--grid", "k=0.8:0.8:1"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 2);

    let out = run(&["scan", "--config", s(&cfg), "--grid", "gamma=1:2:3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_two_axes_in_order() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "fig3.cfg", FIG3);
    let out = run(&["scan", "--config", s(&cfg), "--grid", "k=0.7:0.85:3,Q=0.05:0.1:2"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let k: Vec<f64> = column(&csv, "k").iter().map(|x| x.parse().unwrap()).collect();
    let q: Vec<f64> = column(&csv, "buyer_mass")
        .iter()
        .map(|x| x.parse().unwrap())
        .collect();
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-15 * y);
    assert!(close(&k, &[0.7, 0.7, 0.775, 0.775, 0.85, 0.85]), "{k:?}");
    assert!(close(&q, &[0.05, 0.1, 0.05, 0.1, 0.05, 0.1]), "{q:?}");
    assert_eq!(k.len(), 6);
}

fn figure(dir: &Path, id: &str) {
    let out = run(&["figure-data", "--figure", id, "--out", s(dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn sign_changes(values: &[f64]) -> usize {
    let d: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    d.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
}

#[test]
fn figure_files() {
    let dir = TempDir::new().unwrap();
    for id in ["1", "2", "3"] {
        figure(dir.path(), id);
    }
    let read = |n: &str| std::fs::read_to_string(dir.path().join(n)).unwrap();
    let num = |v: Vec<String>| -> Vec<f64> { v.iter().map(|x| x.parse().unwrap()).collect() };

    let right = num(column(&read("fig1_right.csv"), "u_g"));
    assert_eq!(right.len(), 512);
    assert_eq!(sign_changes(&right), 2);
    let left = num(column(&read("fig1_left.csv"), "u_g"));
    assert_eq!(sign_changes(&left), 0);

    let f2 = read("fig2_left.csv");
    let (bi, mc) = (num(column(&f2, "lambda_b_bi")), num(column(&f2, "lambda_b_mc")));
    let d: Vec<f64> = bi.iter().zip(&mc).map(|(a, b)| a - b).collect();
    assert_eq!(d.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count(), 1);
    let meta: Value = serde_json::from_str(&read("fig2_meta.json")).unwrap();
    assert!(meta["panels"]["right"]["buyer_mass"].as_f64().is_some());
    assert_eq!(meta["panels"]["right"]["equilibria"].as_array().unwrap().len(), 3);

    let f3 = read("fig3.csv");
    let (lo, hi) = (
        num(column(&f3, "lambda_b_lower")),
        num(column(&f3, "lambda_b_upper")),
    );
    assert!(lo[0] < hi[0]);

    let out = run(&["figure-data", "--figure", "7", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_deterministic_and_round_trip() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        figure(d.path(), "3");
    }
    for name in ["fig3.csv", "fig3_meta.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let csv = std::fs::read_to_string(a.path().join("fig3.csv")).unwrap();
    for field in csv.lines().skip(1).flat_map(|l| l.split(',')) {
        let x: f64 = field.parse().unwrap();
        let back: f64 = format!("{x:.16e}").parse().unwrap();
        assert_eq!(x, back);
    }
}

#[test]
fn simulate_writes_report_and_trajectory() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "fig1.cfg", FIG1);
    let out_dir = dir.path().join("sim");
    let args = [
        "simulate",
        "--config",
        s(&cfg),
        "--lambda-g",
        "1.0",
        "--lambda-b",
        "0.5",
        "--sellers",
        "2000",
        "--horizon",
        "100",
        "--seed",
        "9",
        "--out",
        s(&out_dir),
    ];
    assert!(run(&args).status.success());
    let first = std::fs::read(out_dir.join("simulate.json")).unwrap();
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert!(v["flow_terminal_residual"].as_f64().unwrap() < 1e-10);
    let traj = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("time,p_hg,p_lg,p_hb,p_lb\n"));
    assert!(run(&args).status.success());
    assert_eq!(first, std::fs::read(out_dir.join("simulate.json")).unwrap());
}
