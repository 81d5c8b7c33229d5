use std::fs;

use cvriqp::cli::{run, run_command, CommandKind, ConfigArgs, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("cvriqp").chain(args.iter().copied()).map(String::from).collect()
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn header_is_json_and_rows_follow() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    assert_eq!(run(argv(&["scaling", "--n", "1,10,100", "--out", out.to_str().unwrap()])), EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    let header = text.lines().next().unwrap().strip_prefix("# ").unwrap();
    let v: serde_json::Value = serde_json::from_str(header).unwrap();
    assert_eq!(v["command"], "scaling");
    assert_eq!(v["config"]["n"], serde_json::json!([1, 10, 100]));
    let rows = body(&text);
    assert_eq!(rows.len(), 4);
    let db: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!((db[0] - 2.09).abs() < 0.01 && (db[2] - 16.56).abs() < 0.01);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"n": [3], "l": 2, "eta": [0.02]}"#).unwrap();
    let args = ConfigArgs { config: Some(cfg.clone()), n: Some(vec![5]), ..Default::default() };
    let text = run_command(CommandKind::Scaling, &args).unwrap();
    let rows = body(&text);
    assert!(rows[1].starts_with("5,"));
    let header: serde_json::Value = serde_json::from_str(&text.lines().next().unwrap()[2..]).unwrap();
    assert_eq!(header["config"]["l"], 2);
    assert_eq!(header["config"]["eta"], serde_json::json!([0.02]));
    fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let args = ConfigArgs { config: Some(cfg), ..Default::default() };
    assert_eq!(run_command(CommandKind::Scaling, &args).unwrap_err().exit_code(), EXIT_VALIDATION);
}

#[test]
fn validation_failure_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let o = out.to_str().unwrap();
    assert_eq!(run(argv(&["fourier-gadget", "--eta", "1e-9", "--out", o])), EXIT_VALIDATION);
    assert_eq!(run(argv(&["fourier-gadget", "--grid-points", "1000", "--out", o])), EXIT_VALIDATION);
    assert_eq!(run(argv(&["dv", "--out", o])), EXIT_VALIDATION);
    assert_eq!(run(argv(&["scaling", "--n", "0", "--out", o])), EXIT_VALIDATION);
    assert_eq!(run(argv(&["readout", "--eta", "0.3", "--out", o])), EXIT_VALIDATION);
    assert_eq!(run(argv(&["scaling", "--bogus"])), EXIT_VALIDATION);
    assert!(!out.exists());
}

#[test]
fn empty_bin_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let code = run(argv(&["fourier-gadget", "--grid-points", "512", "--extent", "40", "--sigma", "0.5", "--eta", "0.2", "--k", "60", "--out", out.to_str().unwrap()]));
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(!out.exists());
}

#[test]
fn eta_sweep_is_monotone() {
    let args = ConfigArgs { eta: Some(vec![0.005, 0.01, 0.015, 0.02]), ..Default::default() };
    let text = run_command(CommandKind::FourierGadget, &args).unwrap();
    let p: Vec<f64> = body(&text)[1..].iter().map(|r| r.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(p.len(), 4);
    assert!(p.windows(2).all(|w| w[1] > w[0]));
    assert!((p[1] / 1.128e-3 - 1.0).abs() < 0.01);
}

#[test]
fn dv_frequencies_near_half() {
    let args = ConfigArgs { seed: Some(11), state: Some("+i".into()), ..Default::default() };
    let text = run_command(CommandKind::Dv, &args).unwrap();
    let row: Vec<&str> = body(&text)[1].split(',').collect();
    let f: f64 = row[2].parse().unwrap();
    assert!((f - 0.5).abs() < 0.02, "{f}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert_eq!(run(argv(&["dv", "--seed", "5", "--trials", "500", "--out", out.to_str().unwrap()])), EXIT_OK);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
