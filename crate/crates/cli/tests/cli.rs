use std::process::Command;

use point_stability_cli::{exit, run, OutputRecord};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("point-stability").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn record(stdout: &str) -> OutputRecord {
    serde_json::from_str(stdout).unwrap_or_else(|e| panic!("not a record ({e}): {stdout}"))
}

#[test]
fn lambda_text_reports_value_and_error() {
    let (code, out, _) = invoke(&["lambda", "--m", "1", "--beta", "0"]);
    assert_eq!(code, exit::OK);
    assert!(out.starts_with("Lambda(1) = 0.34"), "{out}");
    assert!(out.contains('±'));
}

#[test]
fn lambda_json_round_trips() {
    let (code, out, _) = invoke(&["lambda", "--m", "2", "--beta", "1", "--format", "json"]);
    assert_eq!(code, exit::OK);
    let rec = record(&out);
    assert_eq!(rec.schema_version, "1");
    assert_eq!(rec.command, "lambda");
    assert!(rec.timing.is_some());
    for key in ["value", "error", "quad_err", "opt_err"] {
        assert!(rec.results[key].is_number(), "missing {key}");
    }
    assert_eq!(rec.to_json(), out);
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["frobnicate"][..],
        &["lambda"],
        &["lambda", "--m", "0"],
        &["lambda", "--m", "1", "--beta", "3.5"],
        &["scan", "--points", "1"],
        &["lambda", "--m", "1", "--threads", "0"],
        &["verify", "--suite", "nonsense"],
    ] {
        let (code, out, err) = invoke(args);
        assert_eq!(code, exit::USAGE, "{args:?}: {err}");
        assert!(out.is_empty(), "{args:?} wrote data: {out}");
        assert!(!err.is_empty());
    }
}

#[test]
fn help_is_not_an_error() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, exit::OK);
    assert!(out.contains("critical-mass") && out.contains("verify"));
}

#[test]
fn bounds_at_unit_mass() {
    let (code, out, _) = invoke(&["bounds", "--m", "1", "--format", "json"]);
    assert_eq!(code, exit::OK);
    let rec = record(&out);
    let v = rec.results["analytic_bound"]["value"].as_f64().unwrap();
    assert!((v - 2.47).abs() < 0.01);
    let t = rec.results["analytic_bound_threshold"]["value"].as_f64().unwrap();
    assert!((1.74..=1.78).contains(&t));
}

#[test]
fn bounds_energy_with_supplied_lambda() {
    let (code, out, _) = invoke(&["bounds", "--m", "1", "--alpha", "-1", "--lambda", "0.34", "--format", "json"]);
    assert_eq!(code, exit::OK);
    let e = record(&out).results["energy_lower_bound"]["value"].as_f64().unwrap();
    assert!((e + 0.0058918630938).abs() < 1e-12, "{e}");
}

#[test]
fn bounds_without_energy_bound_below_critical_mass() {
    let (code, out, err) = invoke(&["bounds", "--m", "0.2", "--alpha", "-1"]);
    assert_eq!(code, exit::OK);
    assert!(out.contains("no energy lower bound"), "{out}");
    assert!(err.contains("no energy bound"));
}

#[test]
fn scan_csv_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &std::path::Path, threads: &str| {
        vec![
            "scan".to_string(),
            "--m-min".into(),
            "0.5".into(),
            "--m-max".into(),
            "4".into(),
            "--points".into(),
            "4".into(),
            "--betas".into(),
            "0,2".into(),
            "--threads".into(),
            threads.into(),
            "--out".into(),
            p.display().to_string(),
        ]
    };
    let run_with = |v: Vec<String>| invoke(&v.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(run_with(args(&a, "1")).0, exit::OK);
    assert_eq!(run_with(args(&b, "3")).0, exit::OK);
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    let lines: Vec<&str> = ta.lines().collect();
    assert_eq!(lines[0], "m,lambda,lambda1,lambda2,bound,asym");
    assert_eq!(lines.len(), 5);
    assert!(ta.ends_with('\n'));
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 6);
        assert!(cells[2].is_empty(), "beta = 1 was not requested: {line}");
        for i in [0, 1, 3, 4, 5] {
            cells[i].parse::<f64>().unwrap();
        }
    }
}

#[test]
fn scan_json_rows_carry_errors() {
    let (code, out, _) =
        invoke(&["scan", "--m-min", "1", "--m-max", "2", "--points", "2", "--betas", "0", "--format", "json"]);
    assert_eq!(code, exit::OK);
    let rec = record(&out);
    let rows = rec.results["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(r["error"].as_f64().unwrap() >= 0.0);
        assert!(r["lambda1"].is_null());
        let asym = r["asym"].as_f64().unwrap();
        assert!((asym * 2.0 * 2f64.sqrt() * r["m"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn landscape_grid_and_peak() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("land.csv");
    let p = path.display().to_string();
    let (code, _, _) = invoke(&["landscape", "--m", "1", "--grid", "9", "--out", &p]);
    assert_eq!(code, exit::OK);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("Q,b,value"));
    let cells: Vec<[f64; 3]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(cells.len(), 81);
    assert!(cells.iter().all(|c| c[2] >= 0.0));
    let peak = cells.iter().max_by(|x, y| x[2].total_cmp(&y[2])).unwrap();
    assert_eq!(peak[0], 0.0);
    assert!(peak[2] <= 0.3410 && peak[2] > 0.3);
}

#[test]
fn verify_angular_is_deterministic_and_untimed() {
    let args = [
        "verify",
        "--suite",
        "angular",
        "--masses",
        "1",
        "--betas",
        "0,2",
        "--angular-points",
        "30",
        "--format",
        "json",
    ];
    let (code_a, a, err) = invoke(&args);
    let (code_b, b, _) = invoke(&args);
    assert_eq!((code_a, code_b), (exit::OK, exit::OK), "{err}");
    assert_eq!(a, b);
    let rec = record(&a);
    assert!(rec.timing.is_none());
    assert_eq!(rec.results["passed"], true);
    assert_eq!(rec.results["entries"].as_array().unwrap().len(), 2);
    assert!(err.contains("verify: 2 report(s), 0 failed"));
}

#[test]
fn verify_text_lines() {
    let (code, out, _) = invoke(&["verify", "--suite", "thm2", "--masses", "0.5", "--betas", "2"]);
    assert_eq!(code, exit::OK);
    // Lambda_2(0.5) > 1: every mu is out of regime.
    assert_eq!(out.lines().count(), 3);
    assert!(out.lines().all(|l| l.starts_with("PASS") && l.contains("out_of_regime=5")), "{out}");
}

#[test]
fn binary_reads_thread_count_from_environment() {
    let output = Command::new(env!("CARGO_BIN_EXE_point-stability"))
        .args(["bounds", "--m", "1"])
        .env("POINT_STABILITY_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(exit::USAGE));
    let output = Command::new(env!("CARGO_BIN_EXE_point-stability"))
        .args(["bounds", "--m", "1"])
        .env("POINT_STABILITY_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(exit::OK));
    assert!(String::from_utf8_lossy(&output.stdout).contains("2.470"));
}
