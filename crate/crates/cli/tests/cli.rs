use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn infogeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infogeo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = infogeo(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("{v} is not a number"))
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("infogeo-cli-{}-{name}", std::process::id()))
}

const GAUSS: &str = r#"{"family":"gaussian"}"#;
const POISSON: &str = r#"{"family":"poisson"}"#;

#[test]
fn total_variation_example() {
    let v = json(&["divergence", "--kind", "tv", "--p", "[0.5,0.5]", "--q", "[0.25,0.75]"]);
    let expected = 0.5 * ((0.5f64 - 0.25).abs() + (0.5f64 - 0.75).abs());
    assert!((f(&v["value"]) - expected).abs() < 1e-15);
}

#[test]
fn chernoff_example_on_unit_gaussians() {
    let v = json(&["chernoff", "--model", GAUSS, "--theta1", "0,-0.5", "--theta2", "1,-0.5"]);
    let mu = 1.0f64;
    assert!((f(&v["alpha_star"]) - 0.5).abs() < 1e-9);
    assert!((f(&v["value"]) - mu * mu / 8.0).abs() < 1e-9);
}

#[test]
fn every_command_carries_metadata() {
    let mixture = r#"{"components":[{"kind":"gaussian","mu":0,"sigma":1},{"kind":"laplace","mu":3,"b":1}]}"#;
    let runs: Vec<Vec<&str>> = vec![
        vec!["divergence", "--kind", "js", "--p", "[0.2,0.8]", "--q", "[0.6,0.4]"],
        vec!["legendre", "--model", POISSON, "--eta", "2"],
        vec!["fim", "--model", r#"{"family":"bernoulli","theta":[0.3]}"#],
        vec!["chernoff", "--model", POISSON, "--theta1", "0", "--theta2", "1"],
        vec!["project", "--model", r#"{"family":"categorical","categories":3}"#, "--point", "0.1,0.2", "--constraint", "1,0;0.4", "--chart", "eta"],
        vec!["cluster", "--mixture", mixture, "--thetas", "[[0.1],[0.15],[0.8],[0.85]]", "--k", "2", "--samples", "1000"],
        vec!["rao", "--model", POISSON, "--theta1", "0", "--theta2", "1", "--segments", "16"],
    ];
    for args in runs {
        let v = json(&args);
        assert_eq!(v["command"], args[0], "{args:?}");
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(v["seed"], 0, "default seed echoed for {args:?}");
    }
}

#[test]
fn identical_arguments_give_identical_bytes() {
    let args = ["fim", "--model", r#"{"family":"gaussian","source":[0.5,2.0]}"#, "--method", "score", "--samples", "5000", "--seed", "11"];
    let a = infogeo(&args);
    let b = infogeo(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut other = args;
    other[8] = "12";
    assert_ne!(infogeo(&other).stdout, a.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 11);
}

#[test]
fn simulation_is_reproducible() {
    let args = ["--seed", "5", "chernoff", "--model", GAUSS, "--theta1", "0,-0.5", "--theta2", "1,-0.5", "--simulate", "--trials", "20000"];
    let a = infogeo(&args);
    assert_eq!(a.stdout, infogeo(&args).stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let sim = &v["simulation"];
    let p = f(&sim["error_rate"]);
    let se = (p * (1.0 - p) / 20000.0).sqrt();
    // Φ(−½) for N(0,1) against N(1,1) with a single observation.
    assert!((p - 0.308_537_538_725_986_9).abs() < 4.0 * se, "{p}");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = infogeo(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_name_the_flag() {
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["divergence", "--kind", "tv", "--p", "[0.5,0.5]"], "--q"),
        (vec!["divergence", "--kind", "alpha", "--p", "[0.5,0.5]", "--q", "[0.2,0.8]"], "--alpha"),
        (vec!["legendre", "--model", r#"{"family":"weibull"}"#, "--eta", "1"], "--model.family"),
        (vec!["legendre", "--model", r#"{"family":"gaussian_fixed_var"}"#, "--eta", "1"], "--model.sigma"),
        (vec!["rao", "--model", POISSON, "--theta1", "0", "--theta2", "one"], "--theta2"),
        (vec!["project", "--model", POISSON, "--point", "0", "--constraint", "1,1;0", "--chart", "theta"], "--constraint"),
        (vec!["fim", "--model", r#"{"family":"exponential","theta":[2.0]}"#], "--model.theta"),
    ];
    for (args, flag) in cases {
        let out = infogeo(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(flag), "{args:?}: {err}");
    }
}

#[test]
fn numeric_failures_exit_with_two_and_the_error_kind() {
    let out = infogeo(&["legendre", "--model", r#"{"family":"bernoulli"}"#, "--eta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("DomainError"));

    let out = infogeo(&["chernoff", "--model", POISSON, "--theta1", "0.5", "--theta2", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("InvalidInput"));
}

#[test]
fn help_exits_cleanly() {
    let out = infogeo(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("gaussian_fixed_var"));
    let out = infogeo(&["rao", "--help"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("CSV columns: node,t"));
}

#[test]
fn model_divergences_match_closed_forms() {
    let (l1, l2) = (2.0f64, 3.0f64);
    let p = r#"{"family":"poisson","source":[2]}"#;
    let q = r#"{"family":"poisson","source":[3]}"#;
    let kl = json(&["divergence", "--kind", "kl", "--p", p, "--q", q]);
    assert!((f(&kl["value"]) - (l1 * (l1 / l2).ln() + l2 - l1)).abs() < 1e-12);
    let rev = json(&["divergence", "--kind", "revkl", "--p", p, "--q", q]);
    assert!((f(&rev["value"]) - (l2 * (l2 / l1).ln() + l1 - l2)).abs() < 1e-12);
    let h = json(&["divergence", "--kind", "hellinger", "--p", p, "--q", q]);
    let expected = 2.0 - 2.0 * (-(l1.sqrt() - l2.sqrt()).powi(2) / 2.0).exp();
    assert!((f(&h["value"]) - expected).abs() < 1e-9, "{}", h["value"]);
    // B_F(θp : θq) with F = exp is KL from q to p.
    let b = json(&["divergence", "--kind", "bregman", "--p", p, "--q", q]);
    assert!((f(&b["value"]) - (l2 * (l2 / l1).ln() + l1 - l2)).abs() < 1e-12);
}

#[test]
fn legendre_recovers_gaussian_parameters() {
    // η = (E x, E x²) = (1, 2): mean 1, variance 1.
    let v = json(&["legendre", "--model", GAUSS, "--eta", "[1, 2]"]);
    let theta: Vec<f64> = v["theta"].as_array().unwrap().iter().map(f).collect();
    assert!((theta[0] - 1.0).abs() < 1e-8 && (theta[1] + 0.5).abs() < 1e-8, "{theta:?}");
    let cumulant = -theta[0] * theta[0] / (4.0 * theta[1]) - 0.5 * (-2.0 * theta[1]).ln();
    let expected = theta[0] * 1.0 + theta[1] * 2.0 - cumulant;
    assert!((f(&v["value"]) - expected).abs() < 1e-10);
}

#[test]
fn exact_fim_of_bernoulli() {
    let v = json(&["fim", "--model", r#"{"family":"bernoulli","source":[0.3]}"#]);
    assert!((f(&v["matrix"][0][0]) - 0.3 * 0.7).abs() < 1e-12);
    assert!(v["samples"].is_null());
}

#[test]
fn rao_matches_closed_forms() {
    let v = json(&["rao", "--model", POISSON, "--theta1", "0", "--theta2", "1"]);
    let expected = 2.0 * (1.0f64.sqrt() - 1f64.exp().sqrt()).abs();
    assert!((f(&v["closed_form"]) - expected).abs() < 1e-12);
    assert!((f(&v["distance"]) - expected).abs() < 1e-4 * expected);
    let v = json(&["rao", "--model", r#"{"family":"categorical","categories":3}"#, "--theta1", "0,0", "--theta2", "1,-1"]);
    assert!((f(&v["distance"]) - f(&v["closed_form"])).abs() < 1e-2 * f(&v["closed_form"]));
}

#[test]
fn projection_lands_on_the_constraint() {
    let v = json(&[
        "project", "--model", r#"{"family":"categorical","categories":3}"#,
        "--point", "0.5,-0.2", "--constraint", "[[1,-1]];[0.3]", "--chart", "theta",
    ]);
    let t: Vec<f64> = v["projection"]["theta"].as_array().unwrap().iter().map(f).collect();
    assert!((t[0] - t[1] - 0.3).abs() < 1e-9);
    assert!(f(&v["divergence"]) >= 0.0);
}

#[test]
fn clustering_separates_obvious_groups() {
    let mixture = r#"{"family":"mixture","components":[{"kind":"gaussian","mu":0,"sigma":1},{"kind":"laplace","mu":4,"b":1},{"kind":"cauchy","x0":-4,"gamma":1}]}"#;
    let v = json(&[
        "cluster", "--mixture", mixture,
        "--thetas", "[[0.1,0.1],[0.12,0.1],[0.7,0.1],[0.72,0.12],[0.1,0.7],[0.1,0.72]]",
        "--k", "3", "--samples", "2000", "--seed", "4",
    ]);
    let a: Vec<u64> = v["assignments"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(a[0], a[1]);
    assert_eq!(a[2], a[3]);
    assert_eq!(a[4], a[5]);
    assert!(a[0] != a[2] && a[2] != a[4] && a[0] != a[4]);
}

#[test]
fn csv_output_has_documented_columns() {
    let path = scratch("bhattacharyya.csv");
    let p = path.to_str().unwrap();
    json(&["chernoff", "--model", GAUSS, "--theta1", "0,-0.5", "--theta2", "2,-0.5", "--emit-csv", p]);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,bhattacharyya,bregman_gap"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 99);
    // Skew Jensen gap of the unit-variance location part: α(1−α)Δμ²/2.
    for r in &rows {
        assert!((r[1] - r[0] * (1.0 - r[0]) * 2.0).abs() < 1e-9, "{r:?}");
    }
    let mid = &rows[49];
    assert!(mid[2].abs() < 1e-12);
}

#[test]
fn seventeen_significant_digits_round_trip() {
    let out = infogeo(&["divergence", "--kind", "kl", "--p", "[0.3,0.7]", "--q", "[0.6,0.4]"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let expected = 0.3 * (0.3f64 / 0.6).ln() + 0.7 * (0.7f64 / 0.4).ln();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!((f(&v["value"]) - expected).abs() < 1e-15);
    let start = text.find("\"value\":").unwrap() + 8;
    let digits: String = text[start..].chars().take_while(|c| c.is_ascii_digit() || *c == '.').collect();
    assert!(digits.trim_start_matches("0.").trim_start_matches('0').len() >= 16, "{digits}");
}
