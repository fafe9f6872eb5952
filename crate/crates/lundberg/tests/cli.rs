use std::path::PathBuf;
use std::process::{Command, Output};

use lundberg::CliError;
use lundberg_core::bounds::BoundsReport;
use lundberg_core::Error;

fn preset(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "presets", name].iter().collect();
    p.to_str().unwrap().to_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lundberg")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn write_temp(body: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), body).unwrap();
    f
}

#[test]
fn alpha_text_output() {
    let text = stdout(&["alpha", "--dist", &preset("skew_two_point.json"), "--format", "text"]);
    assert!(text.contains("alpha=0.318157445128\n"), "{text}");
    assert!(text.contains("gaussian_rate=0.350765306122\n"), "{text}");
    assert!(text.contains("tolerance_warning=false\n"));
}

#[test]
fn bounds_csv_values() {
    let csv = stdout(&["bounds", "--dist", &preset("twopoint_07.json"), "--d", "2", "--x", "1"]);
    let r = rows(&csv);
    assert_eq!(r[0], ["quantity", "d_or_x", "lower", "exact_or_estimate", "upper"]);
    assert_eq!(r[1][0], "expected_max");
    let v: Vec<f64> = r[1][2..].iter().map(|s| s.parse().unwrap()).collect();
    // Exact value p/(2p-1) ((p/q)^2 - 1) at p = 0.7.
    let exact = 0.7 / 0.4 * ((7.0f64 / 3.0).powi(2) - 1.0);
    assert!((v[1] - exact).abs() < 1e-10);
    assert!(v[0] < v[1] && v[1] < v[2]);
    assert_eq!(r[2][0], "min_tail");
    let lower: f64 = r[2][2].parse().unwrap();
    assert!((lower - 9.0 / 49.0).abs() < 1e-11);
}

#[test]
#[allow(clippy::approx_constant)]
fn skew_two_point_report() {
    let csv = stdout(&["report", "--dist", &preset("skew_two_point.json"), "--n", "5000"]);
    let r = rows(&csv);
    assert_eq!(r[0], ["check", "param", "value", "stderr", "lower", "upper", "band", "status"]);
    let alpha = r.iter().find(|row| row[0] == "alpha").unwrap();
    assert!((alpha[2].parse::<f64>().unwrap() - 0.318).abs() < 5e-4);
    assert!(r.iter().any(|row| row[0] == "coupling_violations" && row[7] == "PASS"));
    assert!(r.iter().skip(1).all(|row| row[7] != "FAIL"), "{csv}");
}

#[test]
fn errors_exit_with_code_two_and_one_line() {
    let bad_field = write_temp(r#"{"family": "gaussian", "params": {"mu": 1.0, "sigma": 1.0, "nu": 2.0}}"#);
    let bad_param = write_temp(r#"{"family": "gaussian", "params": {"mu": 1.0, "sigma": -1.0}}"#);
    let drift = write_temp(r#"{"family": "gaussian", "params": {"mu": -1.0, "sigma": 1.0}}"#);
    let cases = [
        ("/nonexistent/law.json".to_owned(), "kind=io"),
        (bad_field.path().to_str().unwrap().to_owned(), "kind=parse"),
        (bad_param.path().to_str().unwrap().to_owned(), "exit=2"),
        (drift.path().to_str().unwrap().to_owned(), "exit=2"),
    ];
    for (path, needle) in cases {
        let out = run(&["alpha", "--dist", &path]);
        assert_eq!(out.status.code(), Some(2), "{path}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(err.starts_with("error kind=") && err.contains(needle), "{err}");
        assert!(out.stdout.is_empty());
    }
    let out = run(&["alpha"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["bounds", "--dist", &preset("gaussian_1_1.json"), "--cap", "soon"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_map_to_code_three() {
    assert_eq!(CliError::Core(Error::NoRoot).exit_code(), 3);
    assert_eq!(CliError::Core(Error::StepLimitExceeded { steps: 1 }).exit_code(), 3);
    assert_eq!(CliError::Core(Error::NoNegativeMass).exit_code(), 2);
    assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
}

#[test]
fn bounds_json_round_trips() {
    let text = stdout(&["bounds", "--dist", &preset("gaussian_1_1.json"), "--x", "0.5", "--x", "2", "--format", "json"]);
    let report: BoundsReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.alpha, 2.0);
    assert!((report.emax_upper - 103.395808063).abs() < 1e-8);
    assert_eq!(report.min_tail.len(), 2);
    let again = serde_json::to_value(&report).unwrap();
    assert_eq!(again, serde_json::from_str::<serde_json::Value>(&text).unwrap());
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["simulate", "max", "--dist", &preset("gaussian_1_1.json"), "--n", "30000", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    let c = Command::new(env!("CARGO_BIN_EXE_lundberg")).args(args).env("RAYON_NUM_THREADS", "1").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let d = run(&["simulate", "max", "--dist", &preset("gaussian_1_1.json"), "--n", "30000", "--seed", "8"]);
    assert_ne!(a.stdout, d.stdout);
}

#[test]
fn empty_grid_prints_only_the_header() {
    let csv = stdout(&["simulate", "min", "--dist", &preset("gaussian_1_1.json"), "--n", "1000"]);
    assert_eq!(csv, "quantity,param,estimate,stderr,lower_bound,upper_bound,in_band\n");
}

#[test]
fn simulated_minimum_within_band() {
    let csv = stdout(&["simulate", "min", "--dist", &preset("twopoint_07.json"), "--x", "1", "--x", "2"]);
    let r = rows(&csv);
    assert_eq!(r.len(), 3);
    assert!(r[1..].iter().all(|row| row[6] == "true"), "{csv}");
}

#[test]
fn embed_frequencies_in_band() {
    for scheme in ["dubins", "ay", "ay-minus", "day"] {
        let csv = stdout(&["embed", "--dist", &preset("three_atom.json"), "--scheme", scheme, "--n", "50000"]);
        let r = rows(&csv);
        let freq: Vec<_> = r.iter().filter(|row| row[0] == "frequency").collect();
        assert_eq!(freq.len(), 3);
        assert!(freq.iter().all(|row| row[6] == "true"), "{scheme}: {csv}");
        assert!(r.iter().any(|row| row[0] == "quadratic_time" && row[6] == "true"), "{scheme}");
    }
    let out = run(&["embed", "--dist", &preset("gaussian_1_1.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("report"));
}
