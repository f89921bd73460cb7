use std::path::Path;
use std::process::{Command, Output};

use fractail_cli::commands::{read_sweep_csv, SolveOutput, VerifyOutput};
use fractail_core::asymptotics::classify_regime;
use fractail_core::ProblemParams;

fn fractail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fractail")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn kernel_table_follows_the_next_series_term() {
    let o = fractail(&["kernel", "--alpha", "1", "--x-min", "1", "--x-max", "100", "--points", "200"]);
    assert_eq!(code(&o), 0);
    let mut rdr = csv::Reader::from_reader(&o.stdout[..]);
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["x", "k_quadrature", "k_series", "abs_diff", "k_prime"]);
    let rows: Vec<Vec<String>> = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    assert_eq!(rows.len(), 200);
    let pi = std::f64::consts::PI;
    let mut worst: f64 = 0.0;
    for r in rows.iter().filter(|r| r[0].parse::<f64>().unwrap() >= 20.0) {
        let x: f64 = r[0].parse().unwrap();
        let diff: f64 = r[3].parse().unwrap();
        // With k₂ = 0 at α = 1 the first omitted terms are k₃ x⁻⁴ + k₅ x⁻⁶.
        let next = 6.0 / (pi * x.powi(4)) - 120.0 / (pi * x.powi(6));
        assert!((diff / next - 1.0).abs() < 0.02, "x = {x}: {diff} vs {next}");
        worst = worst.max(diff);
    }
    assert!(worst < 1.1e-5, "{worst}");
}

#[test]
fn kernel_near_origin_is_finite_and_log_singular() {
    let o = fractail(&["kernel", "--alpha", "0.5", "--x-min", "1e-6", "--x-max", "1e-2", "--points", "5", "--log"]);
    assert_eq!(code(&o), 0);
    let mut rdr = csv::Reader::from_reader(&o.stdout[..]);
    let vals: Vec<(f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    for (x, k) in &vals {
        assert!(k.is_finite() && *k > 0.0);
        let ratio = k / (x.powf(-0.5) * x.ln().abs());
        assert!(ratio > 0.01 && ratio < 1.0, "{x} {k} {ratio}");
    }
    assert!(vals.windows(2).all(|w| w[0].1 > w[1].1));
}

#[test]
fn kernel_reports_k_prime_above_one() {
    let o = fractail(&["kernel", "--alpha", "1.5", "--x-min", "2", "--x-max", "4", "--points", "3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(lines.iter().all(|l| l["k_prime"].as_f64().is_some_and(|v| v < 0.0)));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&fractail(&["kernel", "--alpha", "1", "--x-min", "5", "--x-max", "5"])), 2);
    assert_eq!(code(&fractail(&["kernel", "--alpha", "1", "--points", "0"])), 2);
    assert_eq!(code(&fractail(&["solve", "--alpha", "0.4", "--p", "2.9"])), 2);
    assert_eq!(code(&fractail(&["solve", "--alpha", "1", "--p", "2.5", "--kind", "integer-power"])), 2);
    assert_eq!(code(&fractail(&["verify", "--alpha", "1", "--p", "2", "--window", "10"])), 2);
    assert_eq!(code(&fractail(&["sweep", "--alpha", "0.5", "--p", "5:6:1"])), 2);
    assert_eq!(code(&fractail(&["sweep", "--alpha", "1:0:0.1", "--p", "2"])), 2);
    assert_eq!(code(&fractail(&["frobnicate"])), 2);
}

#[test]
fn non_convergence_exits_3() {
    let o = fractail(&["solve", "--alpha", "1", "--p", "2", "--max-iter", "3", "--L", "100", "--n", "2048"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn solve_recovers_the_lorentzian_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solve.json");
    let o = fractail(&["solve", "--alpha", "1", "--p", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = read(&path);
    let out: SolveOutput = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&out).unwrap() + "\n", text);
    let (q, params) = out.profile.into_parts().unwrap();
    assert_eq!((params.alpha, params.p), (1.0, 2.0));
    // The periodic solution sees its images: 2/(1+x²) up to O(L⁻²).
    let l = q.grid.half_length;
    let err = (0..q.grid.n_points)
        .map(|j| {
            let x = q.grid.x(j);
            (q.values[j] - 2.0 / (1.0 + x * x)).abs()
        })
        .fold(0.0, f64::max);
    assert!(err < 1e-4, "{err} at L = {l}");
}

#[test]
fn solve_signed_power_and_csv() {
    let o = fractail(&["solve", "--alpha", "1.5", "--p", "4", "--kind", "signed-power"]);
    assert_eq!(code(&o), 0);
    let out: SolveOutput = serde_json::from_slice(&o.stdout).unwrap();
    assert!(out.convergence.iterations < 500);
    let o = fractail(&["solve", "--alpha", "1.5", "--p", "4", "--format", "csv", "--L", "100", "--n", "4096"]);
    assert_eq!(code(&o), 0);
    let q = fractail_core::spectral::read_profile_csv(&o.stdout[..]).unwrap();
    assert_eq!(q.grid.n_points, 4096);
    assert!((q.grid.half_length - 100.0).abs() < 1e-9);
}

#[test]
fn verify_is_deterministic_and_lists_all_checks() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = fractail(&["verify", "--alpha", "1.5", "--p", "3", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = read(&a);
    assert_eq!(text, read(&b));
    let out: VerifyOutput = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&out).unwrap() + "\n", text);
    let tags: Vec<&str> = out.report.reports.iter().map(|r| r.theorem_tag.as_str()).collect();
    for t in ["first_order", "second_order", "deriv_1", "deriv_2", "deriv_3", "cubic_third_order"] {
        assert!(tags.contains(&t), "{tags:?}");
    }
    assert!(out.report.all_pass());
}

#[test]
fn verify_exact_and_gated_cases() {
    let o = fractail(&["verify", "--alpha", "1", "--p", "2"]);
    assert_eq!(code(&o), 0);
    let out: VerifyOutput = serde_json::from_slice(&o.stdout).unwrap();
    assert!(out.report.reports.iter().all(|r| r.pass), "{:?}", out.report.reports);
    assert!((out.report.coefficients.a1 - 2.0).abs() < 1e-4);

    let o = fractail(&["verify", "--alpha", "0.8", "--p", "2"]);
    assert_eq!(code(&o), 0);
    let out: VerifyOutput = serde_json::from_slice(&o.stdout).unwrap();
    assert!(out.report.get("first_order").is_some() && out.report.get("second_order").is_some());
    assert!(out.report.get("cubic_third_order").is_none());
}

#[test]
fn sweep_rows_follow_the_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = fractail(&[
        "sweep", "--alpha", "0.8,1.0,1.2,1.5", "--p", "2", "--L", "200", "--n", "8192", "--jobs", "2", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", read(&path));
    let rows = read_sweep_csv(read(&path).as_bytes()).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let params = ProblemParams::new(r.alpha, r.p, r.kind.parse().unwrap()).unwrap();
        assert_eq!(r.regime, classify_regime(&params).value.to_string());
        assert_eq!(r.outcome, "ok");
    }
}

#[test]
fn sweep_marks_only_the_balanced_curve() {
    let o = fractail(&["sweep", "--alpha", "1", "--p", "1.5,1.500000001", "--L", "100", "--n", "2048", "--jobs", "1"]);
    let rows = read_sweep_csv(&o.stdout[..]).unwrap();
    assert_eq!(rows[0].regime, "balanced");
    assert_eq!(rows[1].regime, "dispersion_dominated");
}

#[test]
fn sweep_keeps_going_past_invalid_pairs() {
    let o = fractail(&["sweep", "--alpha", "0.5", "--p", "2,4", "--L", "100", "--n", "2048"]);
    let rows = read_sweep_csv(&o.stdout[..]).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].outcome, "ok");
    assert!(rows[1].outcome.contains("invalid"), "{}", rows[1].outcome);
    assert!(!rows[1].all_pass);
}

#[test]
fn single_pair_sweep_matches_verify() {
    let grid = ["--L", "200", "--n", "8192"];
    let v = fractail(&[&["verify", "--alpha", "1.2", "--p", "2", "--format", "csv"][..], &grid[..]].concat());
    let s = fractail(&[&["sweep", "--alpha", "1.2", "--p", "2"][..], &grid[..]].concat());
    assert_eq!(code(&v), code(&s));
    assert_eq!(v.stdout, s.stdout);
}
