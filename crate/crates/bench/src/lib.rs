//! Inputs shared by the benchmarks.

use fractail_core::{Grid, NonlinearityKind, ProblemParams, Profile, SolverOptions};

pub fn lorentzian(grid: Grid) -> Profile {
    Profile::from_fn(grid, |x| 2.0 / (1.0 + x * x)).expect("finite samples")
}

pub fn params(alpha: f64, p: f64) -> ProblemParams {
    ProblemParams::new(alpha, p, NonlinearityKind::IntegerPower).expect("admissible pair")
}

/// Solver settings used by the solve benchmark.
pub fn solver_options() -> SolverOptions {
    SolverOptions { tol_residual: 1e-10, tol_m: 1e-12, ..SolverOptions::default() }
}
