//! Validated run configuration built from the flags.

use std::path::PathBuf;

use fractail_core::asymptotics::{VerifyOptions, Window};
use fractail_core::{EvalOptions, Grid, NonlinearityKind, ProblemParams, SolverOptions};

use crate::args::{Format, GridArgs, KindArg, OutputArgs, SolveArgs};
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Kernel,
    Solve,
    Verify,
    Sweep,
}

/// Everything a single-pair command needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: ProblemParams,
    pub grid: Grid,
    pub solver: SolverOptions,
    pub eval: EvalOptions,
    pub verify: VerifyOptions,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_solve(command: CommandKind, args: &SolveArgs, window: Option<&str>) -> Result<Self, Failure> {
        let params = make_params(args.alpha, args.p, args.kind)?;
        Ok(Self {
            command,
            params,
            grid: make_grid(&args.grid)?,
            solver: make_solver(&args.grid)?,
            eval: EvalOptions::default(),
            verify: VerifyOptions { window: window.map(parse_window).transpose()? },
            output_path: args.output.out.clone(),
            format: args.output.format.unwrap_or(Format::Json),
        })
    }
}

pub fn resolve_kind(p: f64, kind: KindArg) -> NonlinearityKind {
    match kind {
        KindArg::SignedPower => NonlinearityKind::SignedPower,
        KindArg::IntegerPower => NonlinearityKind::IntegerPower,
        KindArg::Auto if p.fract() == 0.0 && p >= 2.0 => NonlinearityKind::IntegerPower,
        KindArg::Auto => NonlinearityKind::SignedPower,
    }
}

/// `α = 2` selects the local validation endpoint.
pub fn make_params(alpha: f64, p: f64, kind: KindArg) -> Result<ProblemParams, Failure> {
    let kind = resolve_kind(p, kind);
    let params =
        if alpha == 2.0 { ProblemParams::validation_boundary(p, kind) } else { ProblemParams::new(alpha, p, kind) };
    Ok(params?)
}

pub fn make_grid(args: &GridArgs) -> Result<Grid, Failure> {
    Ok(Grid::new(args.half_length, args.n_points)?)
}

pub fn make_solver(args: &GridArgs) -> Result<SolverOptions, Failure> {
    let opts = SolverOptions {
        max_iter: args.max_iter,
        tol_residual: args.tol,
        tol_m: args.tol_m,
        ..SolverOptions::default()
    };
    opts.validate()?;
    Ok(opts)
}

pub fn parse_window(s: &str) -> Result<Window, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [lo, hi] = parts[..] else {
        return Err(Failure::usage(format!("window `{s}` must be `lo,hi`")));
    };
    let num = |t: &str| t.parse::<f64>().map_err(|e| Failure::usage(format!("window `{s}`: {e}")));
    Window::new(num(lo)?, num(hi)?).map_err(|e| Failure::usage(e.to_string()))
}

/// Upper bound on the number of values in one sweep axis.
const MAX_AXIS: usize = 10_000;

/// `a`, `a,b,c` or the inclusive range `start:stop:step` with a positive step.
pub fn parse_values(s: &str) -> Result<Vec<f64>, Failure> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| Failure::usage(format!("`{t}` in `{s}`: {e}")));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, h] = parts[..] else {
            return Err(Failure::usage(format!("range `{s}` must be `start:stop:step`")));
        };
        let (a, b, h) = (num(a)?, num(b)?, num(h)?);
        if !h.is_finite() || !a.is_finite() || !b.is_finite() || h <= 0.0 || b < a {
            return Err(Failure::usage(format!("range `{s}` needs start <= stop and a positive step")));
        }
        // Stops within a small fraction of a step count as reached.
        let count = ((b - a) / h + 1e-9).floor() as usize + 1;
        if count > MAX_AXIS {
            return Err(Failure::usage(format!("range `{s}` has more than {MAX_AXIS} values")));
        }
        Ok((0..count).map(|i| a + i as f64 * h).collect())
    } else {
        let v: Vec<f64> = s.split(',').map(num).collect::<Result<_, _>>()?;
        if v.is_empty() {
            return Err(Failure::usage("empty value list".to_string()));
        }
        Ok(v)
    }
}

pub fn output_format(out: &OutputArgs, default: Format) -> Format {
    out.format.unwrap_or(default)
}
