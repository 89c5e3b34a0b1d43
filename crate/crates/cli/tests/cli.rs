use std::process::{Command, Output};

fn lcbounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcbounds")).args(args).env_remove("LCBOUNDS_TOL").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&lcbounds(&["verify", "--bogus"])), 2);
    assert_eq!(code(&lcbounds(&["verify", "--trials", "3"])), 2);
    assert_eq!(code(&lcbounds(&["verify", "--suite", "nonsense", "--seed", "1"])), 2);
    assert_eq!(code(&lcbounds(&["capacity", "--noise", "no-such-noise"])), 2);
    assert_eq!(code(&lcbounds(&["scan", "--s", "0:1"])), 2);
    assert_eq!(code(&lcbounds(&["scan", "--t", "0:1:0.5"])), 2);
    assert_eq!(code(&lcbounds(&["ba", "--noise", "gaussian", "--tol", "-1"])), 2);
}

#[test]
fn fixtures_pass() {
    let o = lcbounds(&["verify", "--suite", "fixtures"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("inequality,trials,min_gap,argmin_seed"));
    assert!(out.lines().any(|l| l.starts_with("thm1,")));
}

#[test]
fn tolerance_below_quadrature_error_is_a_violation() {
    let o = lcbounds(&["verify", "--suite", "fixtures", "--tol", "1e-12"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("violated:"));
}

#[test]
fn tolerance_from_environment() {
    let run = |env: &str, extra: &[&str]| {
        let mut args = vec!["verify", "--suite", "fixtures"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_lcbounds")).args(&args).env("LCBOUNDS_TOL", env).output().unwrap()
    };
    assert_eq!(code(&run("1e-12", &[])), 1);
    assert_eq!(code(&run("1e-12", &["--tol", "1e-3"])), 0);
    assert_eq!(code(&run("1e-3", &[])), 0);
}

#[test]
fn non_convergence_exits_3() {
    let o = lcbounds(&["ba", "--noise", "gaussian", "--grid", "65", "--max-iter", "2"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["converged"], serde_json::Value::Bool(false));
}

#[test]
fn verify_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, workers) in ["1", "3", "3"].iter().enumerate() {
        let out = dir.path().join(format!("run{k}"));
        let o = lcbounds(&[
            "--workers",
            workers,
            "verify",
            "--seed",
            "5",
            "--trials",
            "12",
            "--suite",
            "thm1",
            "--suite",
            "renyi",
            "--suite",
            "isotropic",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let jsonl = std::fs::read(out.join("reports.jsonl")).unwrap();
        let csv = std::fs::read(out.join("summary.csv")).unwrap();
        files.push((jsonl, csv));
    }
    assert!(!files[0].0.is_empty());
    assert_eq!(files[0], files[1]);
    assert_eq!(files[1], files[2]);
    let first = String::from_utf8(files[0].0.clone()).unwrap();
    let line: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    for key in ["name", "inputs", "lhs", "rhs", "gap", "tolerance", "verdict", "units"] {
        assert!(line.get(key).is_some(), "{key}");
    }
}

#[test]
fn capacity_in_bits() {
    let o = lcbounds(&["--units", "bits", "capacity", "--noise", "uniform"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let excess = v["upper_ihara"].as_f64().unwrap() - v["awgn"].as_f64().unwrap();
    assert!((excess - 0.254).abs() <= 1e-3, "{excess}");
    assert_eq!(v["units"], "bits");

    let o = lcbounds(&["--units", "bits", "capacity", "--noise", "exponential"]);
    let v = json(&o);
    assert!((v["slack_bound"].as_f64().unwrap() - 0.443).abs() <= 1e-3);
}

#[test]
fn capacity_with_ba_estimate() {
    let o = lcbounds(&["capacity", "--noise", "gaussian", "--ba", "--grid", "129"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let est = v["ba_estimate"].as_f64().unwrap();
    assert!((est - 0.5 * std::f64::consts::LN_2).abs() < 5e-3, "{est}");
}

#[test]
fn noise_from_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noise.json");
    std::fs::write(&path, r#"{"breakpoints":[0.0,1.0],"slopes":[0.0],"log_f0":0.0,"bounded":true}"#).unwrap();
    let o = lcbounds(&["capacity", "--noise", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let n = 6.0 / (std::f64::consts::PI * std::f64::consts::E) / 3.0;
    let lower = 0.5 * (1.0 + 1.0 / n).ln();
    assert!((v["lower_shannon"].as_f64().unwrap() - lower).abs() < 1e-9);
}

#[test]
fn exploratory_scan_never_fails() {
    let o = lcbounds(&["scan", "--p", "2.4", "--s", "0:1:0.5", "--t", "0.5:1:0.5"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().last().unwrap().starts_with("# min G = "));
}

#[test]
fn scan_outputs() {
    let o = lcbounds(&["scan", "--root"]);
    assert_eq!(code(&o), 0);
    let root: f64 = stdout(&o).trim().parse().unwrap();
    assert!(root > 2.61 && root < 2.62);

    let o = lcbounds(&["scan", "--s", "0:2:0.5", "--t", "0.05:1:0.05"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("s,t,p,G"));
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#') && !l.starts_with('s')).collect();
    assert_eq!(rows.len(), 5 * 20);
    let footer = out.lines().last().unwrap();
    assert!(footer.starts_with("# min G = "), "{footer}");
    assert!(footer.ends_with("t = 0.05"), "{footer}");

    let o = lcbounds(&["scan", "--uvw", "--t", "0:3:0.5"]);
    let out = stdout(&o);
    assert!(out.starts_with("t,u,v,w\n"));
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 8);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("surface.csv");
    let o = lcbounds(&["scan", "--p", "1", "--s", "0:1:0.5", "--t", "0.5:1:0.5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("s,t,p,G\n"));
}
