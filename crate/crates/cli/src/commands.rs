//! The four subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fractail_core::asymptotics::{tail_coefficients, verify_all, SweepRow, VerificationReport, VerifyOptions};
use fractail_core::specfun::{k_prime_eval, tabulate_kernel};
use fractail_core::spectral::write_profile_csv;
use fractail_core::{
    solve_ground_state, ConvergenceReport, Error, EvalOptions, Grid, ProblemParams, ProfileEnvelope, SolverOptions,
};

use crate::args::{Cli, Command, Format, KernelArgs, SweepArgs};
use crate::config::{
    make_grid, make_params, make_solver, output_format, parse_values, parse_window, resolve_kind, CommandKind,
    RunConfig,
};
use crate::{exit_code, Failure, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION};

/// Runs one parsed command line; returns the exit code.
pub fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Kernel(a) => run_kernel(a),
        Command::Solve(a) => run_solve(&RunConfig::from_solve(CommandKind::Solve, a, None)?),
        Command::Verify(a) => run_verify(&RunConfig::from_solve(CommandKind::Verify, &a.solve, a.window.as_deref())?),
        Command::Sweep(a) => run_sweep(a),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// One row of `kernel` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelLine {
    pub x: f64,
    pub k_quadrature: f64,
    pub k_series: Option<f64>,
    pub abs_diff: Option<f64>,
    /// Present for α > 1.
    pub k_prime: Option<f64>,
}

pub fn kernel_points(args: &KernelArgs) -> Result<Vec<f64>, Failure> {
    let (a, b, n) = (args.x_min, args.x_max, args.points);
    if n == 0 || !a.is_finite() || !b.is_finite() || b <= a {
        return Err(Failure::usage(format!("empty range [{a}, {b}] with {n} points")));
    }
    if args.log && a <= 0.0 {
        return Err(Failure::usage("geometric spacing needs x_min > 0"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let t = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n).map(|i| if args.log { a * (b / a).powf(t(i)) } else { a + (b - a) * t(i) }).collect())
}

pub fn kernel_lines(args: &KernelArgs) -> Result<Vec<KernelLine>, Failure> {
    let xs = kernel_points(args)?;
    let eval = EvalOptions { quad_rel_tol: args.tol, ..EvalOptions::default() };
    eval.validate()?;
    let alpha = args.alpha;
    let lines = xs
        .par_iter()
        .map(|&x| -> Result<KernelLine, Error> {
            let row = tabulate_kernel(&[x], alpha, args.terms, &eval)?[0];
            let k_prime = if alpha > 1.0 && x != 0.0 { Some(k_prime_eval(x, alpha, &eval)?) } else { None };
            Ok(KernelLine { x, k_quadrature: row.k_quadrature, k_series: row.k_series, abs_diff: row.abs_diff, k_prime })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(lines)
}

pub fn write_kernel_lines(out: &mut dyn Write, lines: &[KernelLine], format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => write_json(out, &lines)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["x", "k_quadrature", "k_series", "abs_diff", "k_prime"])?;
            for l in lines {
                w.write_record([num(l.x), num(l.k_quadrature), opt_num(l.k_series), opt_num(l.abs_diff), opt_num(l.k_prime)])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn run_kernel(args: &KernelArgs) -> Result<u8, Failure> {
    let lines = kernel_lines(args)?;
    let mut out = open_output(args.output.out.as_deref())?;
    write_kernel_lines(&mut out, &lines, output_format(&args.output, Format::Csv))?;
    out.flush()?;
    Ok(EXIT_OK)
}

/// `solve` output in JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub profile: ProfileEnvelope,
    pub convergence: ConvergenceReport,
}

pub fn run_solve(cfg: &RunConfig) -> Result<u8, Failure> {
    let (q, convergence) = solve_ground_state(&cfg.params, cfg.grid, &cfg.solver)?;
    let mut out = open_output(cfg.output_path.as_deref())?;
    match cfg.format {
        Format::Json => write_json(&mut out, &SolveOutput { profile: ProfileEnvelope::new(&q, &cfg.params), convergence })?,
        Format::Csv => write_profile_csv(&q, &mut out)?,
    }
    out.flush()?;
    Ok(EXIT_OK)
}

/// `verify` output in JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    #[serde(rename = "L")]
    pub half_length: f64,
    #[serde(rename = "N")]
    pub n_points: usize,
    pub iterations: usize,
    pub final_residual: f64,
    pub report: VerificationReport,
}

impl VerifyOutput {
    pub fn row(&self) -> SweepRow {
        SweepRow::from_report(&self.report, self.iterations, self.final_residual)
    }
}

/// Solve, compute the tail constants and run every applicable check.
pub fn verify_pair(
    params: &ProblemParams,
    grid: Grid,
    solver: &SolverOptions,
    eval: &EvalOptions,
    verify: &VerifyOptions,
) -> Result<VerifyOutput, Error> {
    let (q, conv) = solve_ground_state(params, grid, solver)?;
    let coeffs = tail_coefficients(&q, params, eval)?;
    let report = verify_all(&q, params, &coeffs, verify)?;
    Ok(VerifyOutput {
        half_length: grid.half_length,
        n_points: grid.n_points,
        iterations: conv.iterations,
        final_residual: conv.final_residual,
        report,
    })
}

fn verification_code(report: &VerificationReport) -> u8 {
    if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    }
}

pub fn run_verify(cfg: &RunConfig) -> Result<u8, Failure> {
    let result = verify_pair(&cfg.params, cfg.grid, &cfg.solver, &cfg.eval, &cfg.verify)?;
    let mut out = open_output(cfg.output_path.as_deref())?;
    match cfg.format {
        Format::Json => write_json(&mut out, &result)?,
        Format::Csv => write_sweep_csv(&mut out, &[result.row()])?,
    }
    out.flush()?;
    Ok(verification_code(&result.report))
}

pub const SWEEP_HEADER: [&str; 15] = [
    "alpha",
    "p",
    "kind",
    "regime",
    "outcome",
    "iterations",
    "final_residual",
    "a1",
    "first_order",
    "second_order",
    "deriv_1",
    "deriv_2",
    "deriv_3",
    "cubic_third_order",
    "all_pass",
];

pub fn write_sweep_csv(out: &mut dyn Write, rows: &[SweepRow]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.alpha),
            num(r.p),
            r.kind.clone(),
            r.regime.clone(),
            r.outcome.clone(),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt_num(r.final_residual),
            opt_num(r.a1),
            r.first_order.clone(),
            r.second_order.clone(),
            r.deriv_1.clone(),
            r.deriv_2.clone(),
            r.deriv_3.clone(),
            r.cubic_third_order.clone(),
            r.all_pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: io::Read>(input: R) -> Result<Vec<SweepRow>, Failure> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<SweepRow>, _>>()?)
}

/// Rows of a sweep in (α, p) order, α outermost, and the exit code: 4 if
/// any check failed, else 3 if any pair did not converge, else 0.
pub fn sweep_rows(args: &SweepArgs) -> Result<(Vec<SweepRow>, u8), Failure> {
    let alphas = parse_values(&args.alpha)?;
    let ps = parse_values(&args.p)?;
    let grid = make_grid(&args.grid)?;
    let solver = make_solver(&args.grid)?;
    let verify = VerifyOptions { window: args.window.as_deref().map(parse_window).transpose()? };
    let eval = EvalOptions::default();
    let pairs: Vec<(ProblemParams, Option<Failure>)> = alphas
        .iter()
        .flat_map(|&alpha| ps.iter().map(move |&p| (alpha, p)))
        .map(|(alpha, p)| match make_params(alpha, p, args.kind) {
            Ok(params) => (params, None),
            Err(e) => (ProblemParams { alpha, p, kind: resolve_kind(p, args.kind) }, Some(e)),
        })
        .collect();
    if pairs.iter().all(|(_, e)| e.is_some()) {
        let first = pairs.first().and_then(|(_, e)| e.as_ref()).map(|e| e.message.clone()).unwrap_or_default();
        return Err(Failure::usage(format!("no valid (alpha, p) pair in the sweep ({first})")));
    }
    let jobs = match args.jobs {
        Some(0) => return Err(Failure::usage("--jobs must be positive")),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
    // Each pair writes only its own slot; the merge below is sequential.
    let shards: Vec<(SweepRow, u8)> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(params, invalid)| match invalid {
                Some(e) => (SweepRow::from_error(params, &Error::InvalidParams(e.message.clone())), EXIT_USAGE),
                None => match verify_pair(params, grid, &solver, &eval, &verify) {
                    Ok(out) => (out.row(), verification_code(&out.report)),
                    Err(e) => (SweepRow::from_error(params, &e), exit_code(&e)),
                },
            })
            .collect()
    });
    let codes: Vec<u8> = shards.iter().map(|s| s.1).collect();
    let code = if codes.contains(&EXIT_VERIFICATION) {
        EXIT_VERIFICATION
    } else if codes.contains(&EXIT_NOT_CONVERGED) {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    };
    Ok((shards.into_iter().map(|s| s.0).collect(), code))
}

pub fn run_sweep(args: &SweepArgs) -> Result<u8, Failure> {
    let (rows, code) = sweep_rows(args)?;
    let mut out = open_output(args.output.out.as_deref())?;
    match output_format(&args.output, Format::Csv) {
        Format::Json => write_json(&mut out, &rows)?,
        Format::Csv => write_sweep_csv(&mut out, &rows)?,
    }
    out.flush()?;
    Ok(code)
}
