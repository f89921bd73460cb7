//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fractail", version, about = "Resolvent kernel, ground states and tail checks for |D|^α Q + Q = f(Q)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate k (and k' for α > 1) by quadrature and by the series.
    Kernel(KernelArgs),
    /// Solve for the ground state.
    Solve(SolveArgs),
    /// Solve, then run every applicable tail check.
    Verify(VerifyArgs),
    /// Run `verify` over a grid of (α, p) pairs.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// `integer_power` for integral p ≥ 2, otherwise `signed_power`.
    Auto,
    SignedPower,
    IntegerPower,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Half length of the periodic box [-L, L).
    #[arg(long = "L", default_value_t = 400.0)]
    pub half_length: f64,
    /// Number of grid points (a power of two, at least 16).
    #[arg(long = "n", default_value_t = 1 << 15)]
    pub n_points: usize,
    /// Residual target of the solver.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Target for |M - 1|.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_m: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub x_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Geometric instead of uniform spacing.
    #[arg(long)]
    pub log: bool,
    /// Number of series terms.
    #[arg(long, default_value_t = 2)]
    pub terms: usize,
    /// Relative tolerance of the quadrature.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = KindArg::Auto)]
    pub kind: KindArg,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Fit window `lo,hi` used by every check.
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Values of α: `a`, `a,b,c` or the inclusive range `start:stop:step`.
    #[arg(long)]
    pub alpha: String,
    /// Values of p, same syntax as `--alpha`.
    #[arg(long)]
    pub p: String,
    #[arg(long, value_enum, default_value_t = KindArg::Auto)]
    pub kind: KindArg,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Fit window `lo,hi` applied to every pair.
    #[arg(long)]
    pub window: Option<String>,
    /// Pairs solved concurrently; all cores when absent.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}
