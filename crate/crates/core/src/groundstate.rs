//! Ground states of `|D|^α Q + Q = f(Q)` by Petviashvili iteration on the
//! convolution form `Q = k ⋆ f(Q)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::spectral::{Grid, Profile, Spectral};

/// Starting profile for the iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// `2 / (1 + x²)^{(α+1)/2}`
    Lorentzian,
    /// `(3/2) sech²(x/2)`
    Sech2,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Target for the max norm of `|D|^α u + u - f(u)`.
    pub tol_residual: f64,
    /// Target for `|M - 1|`.
    pub tol_m: f64,
    /// Stabilizing exponent; `p / (p - 1)` when absent.
    pub gamma: Option<f64>,
    pub init: InitialGuess,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: 2000, tol_residual: 1e-10, tol_m: 1e-12, gamma: None, init: InitialGuess::Lorentzian }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) {
            return Err(Error::InvalidParams("tol_residual must be positive".into()));
        }
        if !(self.tol_m > 0.0) {
            return Err(Error::InvalidParams("tol_m must be positive".into()));
        }
        if let Some(g) = self.gamma {
            if !(g > 1.0) {
                return Err(Error::InvalidParams(format!("gamma = {g} must exceed 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub final_m: f64,
    pub residual_history: Vec<f64>,
}

/// Grid inner product `dx Σ u v`.
fn dot(a: &[f64], b: &[f64], dx: f64) -> f64 {
    dx * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

/// State shared across iterations of one solve.
struct Stepper<'a> {
    spectral: Spectral,
    params: &'a ProblemParams,
    symbol: Vec<f64>,
}

struct Step {
    next: Vec<f64>,
    m: f64,
    residual: f64,
}

impl<'a> Stepper<'a> {
    fn new(grid: Grid, params: &'a ProblemParams) -> Self {
        let spectral = Spectral::new(grid);
        let symbol = spectral.wavenumbers().iter().map(|xi| 1.0 + xi.abs().powf(params.alpha)).collect();
        Self { spectral, params, symbol }
    }

    /// One Petviashvili step; also returns the residual of the input.
    fn step(&self, u: &[f64], gamma: f64) -> Result<Step> {
        let dx = self.spectral.grid().spacing();
        let f: Vec<f64> = u.iter().map(|&v| self.params.f(v)).collect();
        let mut u_hat = self.spectral.forward(u);
        for (c, s) in u_hat.iter_mut().zip(&self.symbol) {
            *c *= *s;
        }
        let (lu, _) = self.spectral.inverse(u_hat);
        let denom = dot(u, &f, dx);
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Degenerate("<u, f(u)> vanishes".into()));
        }
        let m = dot(u, &lu, dx) / denom;
        let residual = lu.iter().zip(&f).fold(0.0_f64, |r, (a, b)| r.max((a - b).abs()));
        let scale = m.abs().powf(gamma);
        let mut f_hat = self.spectral.forward(&f);
        for (c, s) in f_hat.iter_mut().zip(&self.symbol) {
            *c *= Complex64::new(scale / s, 0.0);
        }
        let (next, _) = self.spectral.inverse(f_hat);
        Ok(Step { next, m, residual })
    }
}

/// One step `u ↦ M^γ (1 + |D|^α)^{-1} f(u)` with
/// `M = ⟨u, (1 + |D|^α) u⟩ / ⟨u, f(u)⟩`; returns the new iterate and `M`.
pub fn iterate_step(u: &Profile, params: &ProblemParams, gamma: f64) -> Result<(Profile, f64)> {
    let stepper = Stepper::new(u.grid, params);
    let s = stepper.step(&u.values, gamma)?;
    Ok((Profile { grid: u.grid, values: s.next }, s.m))
}

/// Initial profile on `grid`.
pub fn initial_profile(init: &InitialGuess, params: &ProblemParams, grid: Grid) -> Result<Profile> {
    match init {
        InitialGuess::Lorentzian => {
            let e = 0.5 * (params.alpha + 1.0);
            Profile::from_fn(grid, |x| 2.0 / (1.0 + x * x).powf(e))
        }
        InitialGuess::Sech2 => Profile::from_fn(grid, |x| 1.5 / (0.5 * x).cosh().powi(2)),
        InitialGuess::Custom(values) => Profile::new(grid, values.clone()),
    }
}

fn symmetrize(values: &mut [f64], grid: &Grid) {
    let n = values.len();
    for j in 1..n / 2 {
        let m = grid.mirror(j);
        let avg = 0.5 * (values[j] + values[m]);
        values[j] = avg;
        values[m] = avg;
    }
}

/// Circular shift placing the maximum at `x = 0`, followed by a sub-grid
/// Fourier shift from a quadratic fit of the peak.
pub fn center_profile(u: &Profile) -> Profile {
    let grid = u.grid;
    let n = grid.n_points;
    let arg = (0..n).max_by(|&a, &b| u.values[a].total_cmp(&u.values[b])).unwrap_or(0);
    let shift = (grid.center_index() + n - arg) % n;
    let mut values = vec![0.0; n];
    for (j, v) in u.values.iter().enumerate() {
        values[(j + shift) % n] = *v;
    }
    let c = grid.center_index();
    let (l, m, r) = (values[c - 1], values[c], values[c + 1]);
    let curv = l - 2.0 * m + r;
    let offset = if curv < 0.0 { 0.5 * (l - r) / curv } else { 0.0 };
    if offset.abs() > 1e-12 && offset.abs() < 1.0 {
        // Peak sits at x = offset·dx; translate it back to the origin.
        let spectral = Spectral::new(grid);
        let delta = offset * grid.spacing();
        let nyquist = n / 2;
        values = spectral.apply_multiplier(&values, |k, xi| {
            if k == nyquist {
                Complex64::new((xi * delta).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, xi * delta)
            }
        });
    }
    Profile { grid, values }
}

/// Iterates [`iterate_step`] from `opts.init` until the residual and
/// `|M - 1|` targets are met. Each iterate is symmetrized about `x = 0`.
pub fn solve_ground_state(params: &ProblemParams, grid: Grid, opts: &SolverOptions) -> Result<(Profile, ConvergenceReport)> {
    params.validate()?;
    opts.validate()?;
    let gamma = opts.gamma.unwrap_or_else(|| params.default_gamma());
    let stepper = Stepper::new(grid, params);
    let mut u = initial_profile(&opts.init, params, grid)?.values;
    let mut history = Vec::new();
    let mut last_m = f64::NAN;
    for it in 0..opts.max_iter {
        let step = stepper.step(&u, gamma)?;
        if !step.residual.is_finite() || !step.m.is_finite() || step.next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Instability { iteration: it });
        }
        history.push(step.residual);
        last_m = step.m;
        if step.residual <= opts.tol_residual && (step.m - 1.0).abs() <= opts.tol_m {
            let report =
                ConvergenceReport { iterations: it, final_residual: step.residual, final_m: step.m, residual_history: history };
            let profile = center_profile(&Profile { grid, values: u });
            return Ok((profile, report));
        }
        u = step.next;
        symmetrize(&mut u, &grid);
    }
    let final_residual = history.last().copied().unwrap_or(f64::NAN);
    Err(Error::NotConverged {
        report: Box::new(ConvergenceReport {
            iterations: opts.max_iter,
            final_residual,
            final_m: last_m,
            residual_history: history,
        }),
    })
}
