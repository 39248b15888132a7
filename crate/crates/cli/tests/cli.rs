use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nlss_cli::csv::HEADER;

fn nlss(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nlss"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("NLSS_THREADS", t),
        None => cmd.env_remove("NLSS_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, params: &str, extra: &str) -> String {
    let text = format!(
        r#"{{"domain": {{"kind": "interval", "lengths": [3.141592653589793], "n": 32}},
 "params": {params}{extra},
 "output": {{"dir": "{}"}}}}"#,
        dir.join("default_out").display()
    );
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const RESONANT: &str = r#"{"mu1": 1.0, "mu2": 1.0, "beta": 2.0}"#;
const LAMBDA1: &str = r#", "tau_mode": "lambda1", "solver": {"seed": 3}"#;

#[test]
fn solve_writes_report_with_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", RESONANT, LAMBDA1);
    let out = dir.path().join("run");
    let o = nlss(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    for key in ["t11", "t12", "t13"] {
        assert!(json["verdicts"][key]["verdict"].is_string());
    }
    assert_eq!(json["verdicts"]["t12"]["verdict"], "pass");
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').count(), HEADER.split(',').count());
}

#[test]
fn solve_uses_configured_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", RESONANT, LAMBDA1);
    let o = nlss(&["solve", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("default_out/report.json").exists());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", r#"{"mu1": 1.0, "mu2": 1.0, "beta": -1.0}"#, LAMBDA1);
    let o = nlss(&["solve", "--config", &bad], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta must be > 0"));

    let o = nlss(&["solve", "--config", dir.path().join("nope.json").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));

    let typo = write_config(dir.path(), "typo.json", r#"{"mu1": 1.0, "mu2": 1.0, "betta": 1.0}"#, LAMBDA1);
    let o = nlss(&["thresholds", "--config", &typo], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("betta"));

    let notau = write_config(dir.path(), "notau.json", RESONANT, "");
    assert_eq!(nlss(&["solve", "--config", &notau], None).status.code(), Some(1));

    let good = write_config(dir.path(), "c.json", RESONANT, LAMBDA1);
    let o = nlss(&["sweep", "--config", &good, "--vary", "beta", "--from", "1", "--to", "2", "--steps", "1"], None);
    assert_eq!(o.status.code(), Some(1));
    let o = nlss(&["sweep", "--config", &good, "--vary", "beta", "--from", "0", "--to", "2", "--steps", "3", "--log"], None);
    assert_eq!(o.status.code(), Some(1));
    let o = nlss(&["sweep", "--config", &good, "--vary", "tau1", "--from", "0", "--to", "2", "--steps", "3"], None);
    assert_eq!(o.status.code(), Some(1));
    let o = nlss(&["solve", "--config", &good], Some("zero"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_is_deterministic_across_pool_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", RESONANT, LAMBDA1);
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = nlss(
            &["sweep", "--config", &cfg, "--vary", "beta", "--from", "0.5", "--to", "2.5", "--steps", "3", "--out", out.to_str().unwrap()],
            Some(threads),
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        (fs::read(out.join("sweep.csv")).unwrap(), fs::read_to_string(out.join("sweep.svg")).unwrap())
    };
    let (a, svg) = run("a", "1");
    let (b, _) = run("b", "3");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap(), HEADER);
    assert_eq!(text.lines().count(), 4);
    assert!(svg.starts_with("<svg") && svg.contains("e_est") && svg.contains("max μ") && !svg.contains("3√(μ₁μ₂)"));
}

#[test]
fn failed_sweep_points_leave_nan_and_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", RESONANT, LAMBDA1);
    let out = dir.path().join("s");
    let o = nlss(&["sweep", "--config", &cfg, "--vary", "beta", "--from", "-1", "--to", "1", "--steps", "3", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("point 0"));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[1].contains("NaN") && rows[2].contains("NaN") && !rows[3].contains("NaN"));
}

#[test]
fn thresholds_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", RESONANT, LAMBDA1);
    let o = nlss(&["thresholds", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let get = |k: &str| -> f64 {
        text.lines().find(|l| l.starts_with(k)).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    let (b1, b2) = (get("beta_hat_1"), get("beta_hat_2"));
    assert!((b1 - b2).abs() <= 1e-6 * b1);
    assert_eq!(get("three_sqrt_mu1_mu2"), 3.0);

    let definite = write_config(dir.path(), "d.json", r#"{"tau1": 0.5, "tau2": 0.0, "mu1": 1.0, "mu2": 2.0, "beta": 1.0}"#, "");
    let o = nlss(&["thresholds", "--config", &definite, "--json"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["beta_hat_1", "beta_hat_2", "lambda_cap", "three_sqrt", "mu_max"] {
        assert!(v[key].as_f64().unwrap() > 0.0, "{key}");
    }
    assert_eq!(v["mu_max"], 2.0);
}
