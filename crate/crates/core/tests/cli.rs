use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bcenc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcenc"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const TWO_VAR: &str = r#"{"Q":[[2,1],[1,2]],"q":[-4,-4],"kappa":[10,10],"n":2}"#;

#[test]
fn encode_prints_coefficients() {
    for (kappa, mu, expected) in [("12", "8", "[1,2,4,5]"), ("20", "6", "[1,2,4,6,6,1]"), ("1", "1", "[1]")] {
        let o = bcenc(&["encode", "--kappa", kappa, "--mu", mu]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o).trim(), expected);
    }
    let o = bcenc(&["encode", "--kappa", "12", "--scheme", "binary"]);
    assert_eq!(stdout(&o).trim(), "[1,2,4,5]");
    let o = bcenc(&["encode", "--kappa", "3", "--scheme", "unary"]);
    assert_eq!(stdout(&o).trim(), "[1,1,1]");
}

#[test]
fn encode_domain_errors_exit_2() {
    for args in [["encode", "--kappa", "5", "--mu", "0"], ["encode", "--kappa", "5", "--mu", "6"]] {
        let o = bcenc(&args);
        assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
        assert!(stderr(&o).starts_with("error:"));
    }
}

#[test]
fn bounds_on_two_variable_instance() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "p.json", TWO_VAR);
    let o = bcenc(&["bounds", "--input", &input, "--epsilon-l", "0.1", "--epsilon-c", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mu"], serde_json::json!([2, 2]));
    assert_eq!(v["m_l"], serde_json::json!(26.0));
    assert_eq!(v["m_c"], serde_json::json!(1.0));
}

#[test]
fn bounds_infeasible_precision_exits_3_naming_pair() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "p.json",
        r#"{"Q":[[1,100],[100,1]],"q":[0,0],"kappa":[4,4],"n":2}"#,
    );
    let o = bcenc(&["bounds", "--input", &input, "--epsilon-l", "0.01", "--epsilon-c", "0.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("pair (0, 1)"), "{}", stderr(&o));
}

#[test]
fn bounds_rejects_bad_epsilon_with_exit_2() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "p.json", TWO_VAR);
    let o = bcenc(&["bounds", "--input", &input, "--epsilon-l", "1.5", "--epsilon-c", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_exits_1() {
    let o = bcenc(&["solve", "--input", "/nonexistent/model.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn convert_then_solve_recovers_minimizer() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "p.json", TWO_VAR);
    let bounds = dir.path().join("mu.json");
    let model = dir.path().join("ising.json");
    let enc = dir.path().join("enc.json");
    let o = bcenc(&[
        "bounds", "--input", &input, "--epsilon-l", "0.1", "--epsilon-c", "0.1",
        "--output", bounds.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = bcenc(&[
        "convert", "--input", &input, "--target", "ising",
        "--mu-from", bounds.to_str().unwrap(),
        "--encoding-out", enc.to_str().unwrap(),
        "--output", model.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&enc).unwrap(), "{\"coefficients\":[[1,2,2,2,2,1],[1,2,2,2,2,1]]}\n");
    let o = bcenc(&["solve", "--input", model.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // f(x) = 2x0² + 2x0x1 + 2x1² - 4x0 - 4x1 scanned over the grid
    let f = |a: i64, b: i64| 2 * a * a + 2 * a * b + 2 * b * b - 4 * a - 4 * b;
    let best = (0..=10).flat_map(|a| (0..=10).map(move |b| f(a, b))).min().unwrap();
    assert_eq!(v["energy"].as_f64().unwrap(), best as f64);
    assert!(v["degeneracy"].as_u64().unwrap() >= 3);

    let o = bcenc(&["convert", "--input", &input, "--target", "qubo", "--encoding", "binary"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["num_bits"], serde_json::json!(8));
}

#[test]
fn convert_bounded_requires_mu() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "p.json", TWO_VAR);
    let o = bcenc(&["convert", "--input", &input, "--target", "ising"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bcenc(&["convert", "--input", &input, "--target", "ising", "--mu-from", "uniform:3"]);
    assert!(o.status.success());
}

#[test]
fn solve_two_spin_ferromagnet() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "m.json", r#"{"J":[[0,1,-1.0]],"h":[0,0],"num_spins":2,"offset":0}"#);
    let o = bcenc(&["solve", "--input", &input]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["energy"].as_f64().unwrap(), -1.0);
    assert_eq!(v["degeneracy"], serde_json::json!(2));
    assert_eq!(v["states"], serde_json::json!([[-1, -1], [1, 1]]));
}

#[test]
fn solve_over_capacity_exits_4() {
    let dir = TempDir::new().unwrap();
    let text = format!(r#"{{"J":[],"h":{:?},"num_spins":31,"offset":0}}"#, vec![1.0; 31]);
    let input = write(dir.path(), "m.json", &text);
    let o = bcenc(&["solve", "--input", &input]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn gen_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let x = dir.path().join("x.json");
    for out in [&a, &b] {
        let o = bcenc(&[
            "gen", "--family", "convex", "--n", "3", "--kappa", "12", "--seed", "7",
            "--output", out.to_str().unwrap(), "--planted", x.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let planted: Vec<u64> = serde_json::from_str(&fs::read_to_string(&x).unwrap()).unwrap();
    assert_eq!(planted.len(), 3);
    assert!(planted.iter().all(|&v| v <= 12));

    let o = bcenc(&["gen", "--family", "uniform", "--seed", "7", "--alpha-l", "3"]);
    assert!(o.status.success());
    let o2 = bcenc(&["gen", "--family", "uniform", "--seed", "8", "--alpha-l", "3"]);
    assert_ne!(o.stdout, o2.stdout);
}

#[test]
fn resilience_without_noise_is_fully_robust() {
    let dir = TempDir::new().unwrap();
    let o = bcenc(&[
        "resilience", "--seed", "5", "--out-dir", dir.path().to_str().unwrap(),
        "--trials", "3", "--epsilons", "0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = stdout(&o);
    assert_eq!(summary, fs::read_to_string(dir.path().join("summary.csv")).unwrap());
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("encoding,epsilon,mean_r,n_instances"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[2], "1", "{row}");
    }
    for f in ["trials.csv", "cells.csv"] {
        assert!(dir.path().join(f).exists());
    }
}
