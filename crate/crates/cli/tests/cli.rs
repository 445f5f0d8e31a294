use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const FAST: [&str; 4] = ["--restarts", "8", "--max-iterations", "150"];

fn rdeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdeq")).args(args).env_remove("RDEQ_WORKERS").output().expect("binary runs")
}

fn record(args: &[&str]) -> Value {
    let out = rdeq(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1, "one record per command");
    serde_json::from_str(&text).unwrap()
}

fn num(v: &Value, path: &[&str]) -> f64 {
    path.iter().fold(v, |v, k| &v[*k]).as_f64().unwrap_or_else(|| panic!("{path:?} missing in {v}"))
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn assert_single_line_failure(out: &Output, code: i32) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "diagnostic: {err:?}");
    assert!(out.stdout.is_empty());
}

#[test]
fn prop3_counterexample_value() {
    let args = ["region", "--model", "bec-bsc", "--beta", "1", "--eps", "0.1", "--zeta", "0.1", "--bound", "prop3"];
    let r = record(&[&args[..], &["--k", "1", "--D", "0"]].concat());
    assert!((num(&r, &["results", "delta"]) - 0.056).abs() < 0.001);
    assert_eq!(r["command"], "region");
    assert_eq!(r["provenance"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn constant_auxiliaries_give_side_information_equivocation() {
    let r = record(&["region", "--bound", "inner", "--eval-constant", "--beta", "0.5", "--eps", "0.2"]);
    let h_a_given_e = 0.721928; // h2(0.2)
    assert!((num(&r, &["results", "delta"]) - h_a_given_e).abs() < 1e-6);
}

#[test]
fn outer_bound_on_counterexample() {
    let r = record(&[&["region", "--bound", "outer"][..], &FAST].concat());
    assert!((num(&r, &["results", "delta"]) - 0.258).abs() < 0.001);
    assert!(r["results"]["argmax"]["source"]["uv_given_a"].is_array());
}

#[test]
fn infeasible_point_names_constraint() {
    let out = rdeq(&[&["region", "--bound", "inner", "--k", "0.1"][..], &FAST].concat());
    assert_single_line_failure(&out, 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("rate") && err.contains("violated"), "{err}");
}

#[test]
fn identical_flags_give_identical_records() {
    let args = [&["region", "--bound", "inner", "--k", "1.5", "--D", "0.05", "--seed", "7"][..], &FAST].concat();
    let a = rdeq(&args);
    let b = rdeq(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn records_round_to_six_decimals() {
    let r = record(&["classify", "--beta", "0.4", "--eps", "0.1"]);
    let x = num(&r, &["results", "thresholds", "more_capable"]);
    assert_eq!(x, 0.468996);
    let text = serde_json::to_string(&r).unwrap();
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["command", "inputs", "provenance", "results"]);
    assert!(text.starts_with("{\"command\""));
}

#[test]
fn classify_and_order() {
    assert_eq!(record(&["classify", "--beta", "0.1", "--eps", "0.1"])["results"]["regime"], "MarkovDegraded");
    assert_eq!(record(&["classify", "--beta", "0.9", "--eps", "0.1"])["results"]["regime"], "None");

    let r = record(&["order", "--relation", "less-noisy", "--first", "bsc:0.1", "--second", "bsc:0.1"]);
    assert_eq!(r["results"]["holds"], true);

    let r = record(&["order", "--relation", "degraded", "--first", "bsc:0.1", "--second", "bsc:0.2"]);
    assert_eq!(r["results"]["holds"], true);
    let w = &r["results"]["certificate"]["degrading_channel"];
    assert!((w[0][1].as_f64().unwrap() - 0.125).abs() < 1e-6);

    let r = record(&["order", "--relation", "degraded", "--first", "bsc:0.2", "--second", "bsc:0.1"]);
    assert_eq!(r["results"]["holds"], false);

    // BEC(0.5) vs BSC(0.1): more capable but not less noisy
    let r = record(&["order", "--relation", "less-noisy", "--pair", "source", "--beta", "0.4", "--eps", "0.1"]);
    assert_eq!(r["results"]["holds"], false);
    assert!(r["results"]["certificate"]["concavity_violation"].is_object());
}

#[test]
fn simulations() {
    let r = record(&["sim", "uncoded", "--eps", "0.1", "--zeta", "0.1", "--trials", "50"]);
    assert!((num(&r, &["results", "equivocation_per_symbol"]) - 0.258).abs() < 0.001);

    let r = record(&["sim", "binning", "--rate", "1.0", "--trials", "50"]);
    assert_eq!(num(&r, &["results", "equivocation_per_symbol"]), 0.0);

    let r = record(&["sim", "binning", "--beta", "0", "--rate", "0.5", "--n", "12", "--trials", "200"]);
    assert!((num(&r, &["results", "equivocation_per_symbol"]) - 0.5).abs() < 0.05);

    let sep = ["sim", "separation", "--r1", "0.25", "--r2", "0.5", "--rc", "0.25", "--rp", "0.5", "--trials", "100"];
    let serial = [&sep[..], &["--serial"]].concat();
    assert_eq!(record(&sep)["results"], record(&serial)["results"]);
}

#[test]
fn simulation_limits_are_reported() {
    let out = rdeq(&["sim", "uncoded", "--n", "30"]);
    assert_single_line_failure(&out, 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("n = 30"));

    let out = rdeq(&["sim", "separation", "--r1", "0.5", "--r2", "0.5", "--rc", "0.25", "--rp", "0.25"]);
    assert_single_line_failure(&out, 2);
}

#[test]
fn beta_sweep_is_nonincreasing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("beta.csv");
    let p = path.to_str().unwrap();
    let args = ["sweep", "--bound", "inner", "--eps", "0.1", "--axis", "beta=0:1:3", "--output", p];
    let r = record(&[&args[..], &FAST].concat());
    assert_eq!(r["results"]["rows"], 3);

    let (header, rows) = read_csv(&path);
    assert_eq!(header[..3], ["beta", "delta", "distortion"]);
    assert_eq!(rows.len(), 3);
    let delta: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(delta.windows(2).all(|w| w[1] <= w[0] + 1e-6), "{delta:?}");
}

#[test]
fn classify_sweep_reproduces_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("classify.csv");
    record(&["sweep", "--bound", "classify", "--axis", "eps=0.05:0.45:5", "--output", path.to_str().unwrap()]);
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["eps", "beta_markov_degraded", "beta_less_noisy", "beta_more_capable"]);
    for row in rows {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        let eps = v[0];
        let h2 = -eps * eps.log2() - (1.0 - eps) * (1.0 - eps).log2();
        let expected = [(2.0 * eps).min(1.0), (4.0 * eps * (1.0 - eps)).min(1.0), h2];
        for (got, want) in v[1..].iter().zip(expected) {
            assert!((got - want).abs() < 1e-8, "eps {eps}: {got} vs {want}");
        }
    }
}

#[test]
fn csv_numbers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.csv");
    let args = ["sweep", "--bound", "inner", "--axis", "k=1:2:3", "--axis", "D=0:0.1:2", "--output"];
    record(&[&args[..], &[path.to_str().unwrap()], &FAST].concat());
    let (_, rows) = read_csv(&path);
    assert_eq!(rows.len(), 6);
    for row in rows {
        for cell in &row[..4] {
            let x: f64 = cell.parse().unwrap();
            let reprinted = format!("{:.8e}", x);
            assert_eq!(reprinted.parse::<f64>().unwrap(), x, "{cell}");
        }
    }
}

#[test]
fn empty_range_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    let out = rdeq(&["sweep", "--bound", "inner", "--axis", "k=1:2:0", "--output", path.to_str().unwrap()]);
    assert_single_line_failure(&out, 1);
    assert!(!path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn usage_errors() {
    assert_single_line_failure(&rdeq(&["region", "--bound", "inner", "--frobnicate"]), 1);
    assert_single_line_failure(&rdeq(&["sweep", "--bound", "inner", "--axis", "gamma=0:1:2", "--output", "x"]), 1);
    assert_single_line_failure(&rdeq(&["region", "--bound", "prop3", "--k", "2"]), 1);
    assert!(rdeq(&["--help"]).status.success());
    assert!(rdeq(&["sweep", "--help"]).status.success());
    assert!(rdeq(&["--version"]).status.success());
}

#[test]
fn worker_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_rdeq"))
        .args(["classify", "--beta", "0.1", "--eps", "0.1"])
        .env("RDEQ_WORKERS", "zero")
        .output()
        .unwrap();
    assert_single_line_failure(&out, 1);
    let out = Command::new(env!("CARGO_BIN_EXE_rdeq"))
        .args(["sim", "uncoded", "--trials", "10"])
        .env("RDEQ_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn model_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(
        &good,
        "# independent side informations\n\
         [source]\na_size = 2\nb_size = 2\ne_size = 2\n\
         p_abe = [0.225, 0.225, 0.025, 0.025, 0.025, 0.025, 0.225, 0.225]\n\
         [channel]\nx_size = 2\ny_size = 2\nz_size = 2\n\
         p_yz_given_x = [0.9, 0.1, 0.0, 0.0, 0.0, 0.0, 0.1, 0.9]\n",
    )
    .unwrap();
    let g = good.to_str().unwrap();
    let r = record(&["region", "--model", g, "--bound", "inner", "--eval-constant"]);
    // E carries nothing about A here
    assert!((num(&r, &["results", "delta"]) - 1.0).abs() < 1e-6);
    let r = record(&["order", "--relation", "less-noisy", "--model", g, "--pair", "source"]);
    assert_eq!(r["results"]["holds"], true);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[source]\na_size = 2\nb_size = 1\ne_size = 1\np_abe = [0.5, 0.6]\n[channel]\nx_size = 1\ny_size = 1\nz_size = 1\np_yz_given_x = [1.0]\n").unwrap();
    assert_single_line_failure(&rdeq(&["region", "--model", bad.to_str().unwrap(), "--bound", "inner"]), 2);

    let garbled = dir.path().join("garbled.toml");
    std::fs::write(&garbled, "[source\nnonsense").unwrap();
    assert_single_line_failure(&rdeq(&["region", "--model", garbled.to_str().unwrap(), "--bound", "inner"]), 2);

    assert_single_line_failure(&rdeq(&["region", "--model", g, "--bound", "prop3"]), 1);
}
