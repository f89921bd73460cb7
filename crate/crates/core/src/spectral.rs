//! Periodic pseudospectral discretization on `[-L, L)`.
//!
//! Wavenumbers are `ξ_m = π m / L` for `m ∈ [-N/2, N/2)`. Multipliers are
//! applied through complex FFTs; the DFT normalization is folded into the
//! inverse transform.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{NonlinearityKind, ProblemParams};

/// Uniform periodic grid `x_j = -L + j dx`, `dx = 2L / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_length: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::Domain(format!("half length L = {half_length} must be positive")));
        }
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::Domain(format!("N = {n_points} must be a power of two >= 16")));
        }
        Ok(Self { half_length, n_points })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Index of `x = 0`.
    pub fn center_index(&self) -> usize {
        self.n_points / 2
    }

    /// Wavenumber of DFT bin `k` (FFT ordering).
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n_points as i64;
        let m = if (k as i64) < n / 2 { k as i64 } else { k as i64 - n };
        std::f64::consts::PI * m as f64 / self.half_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.wavenumber(k)).collect()
    }

    /// Index reflecting `x_j` to `-x_j`.
    pub fn mirror(&self, j: usize) -> usize {
        (self.n_points - j) % self.n_points
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::Data(format!("{} samples for a grid of {} points", values.len(), grid.n_points)));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite sample at index {j}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.n_points] }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Profile, b: f64) -> Result<Profile> {
        same_grid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(u, v)| a * u + b * v).collect();
        Ok(Profile { grid: self.grid, values })
    }

    /// Samples at `x_j >= 0` as `(x, value)` pairs.
    pub fn right_half(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = self.grid.center_index();
        self.values[c..].iter().enumerate().map(move |(i, v)| (self.grid.x(c + i), *v))
    }
}

fn same_grid(a: &Profile, b: &Profile) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Data("profiles live on different grids".into()));
    }
    Ok(())
}

fn check_finite(u: &Profile) -> Result<()> {
    match u.values.iter().position(|v| !v.is_finite()) {
        Some(j) => Err(Error::Data(format!("non-finite sample at index {j}"))),
        None => Ok(()),
    }
}

/// Cached forward and inverse transforms for one grid size.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    xi: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n_points);
        let inverse = planner.plan_fft_inverse(grid.n_points);
        Self { grid, forward, inverse, xi: grid.wavenumbers() }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.xi
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform including the `1/N` factor; returns the real part
    /// and the largest imaginary magnitude.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> (Vec<f64>, f64) {
        self.inverse.process(&mut spectrum);
        let scale = 1.0 / self.grid.n_points as f64;
        let mut leak: f64 = 0.0;
        let values = spectrum
            .iter()
            .map(|c| {
                leak = leak.max((c.im * scale).abs());
                c.re * scale
            })
            .collect();
        (values, leak)
    }

    /// Applies the Fourier multiplier `m(ξ)` (bin index and wavenumber).
    pub fn apply_multiplier(&self, u: &[f64], m: impl Fn(usize, f64) -> Complex64) -> Vec<f64> {
        let mut spectrum = self.forward(u);
        for (k, c) in spectrum.iter_mut().enumerate() {
            *c *= m(k, self.xi[k]);
        }
        self.inverse(spectrum).0
    }

    fn check(&self, u: &Profile) -> Result<()> {
        if u.grid != self.grid {
            return Err(Error::Data("profile grid does not match the transform".into()));
        }
        check_finite(u)
    }

    pub fn riesz(&self, u: &Profile, alpha: f64) -> Result<Profile> {
        self.check(u)?;
        check_order(alpha)?;
        let values = self.apply_multiplier(&u.values, |_, xi| Complex64::new(xi.abs().powf(alpha), 0.0));
        Ok(Profile { grid: self.grid, values })
    }

    pub fn resolvent(&self, u: &Profile, alpha: f64) -> Result<Profile> {
        self.check(u)?;
        check_order(alpha)?;
        let values = self.apply_multiplier(&u.values, |_, xi| Complex64::new(1.0 / (1.0 + xi.abs().powf(alpha)), 0.0));
        Ok(Profile { grid: self.grid, values })
    }

    /// `j`-th derivative by the multiplier `(iξ)^j`; the Nyquist bin is
    /// dropped for odd `j`. Bins whose magnitude is below
    /// `noise_floor · max|û|` are discarded before differentiating.
    pub fn derivative(&self, u: &Profile, j: u32, noise_floor: f64) -> Result<Profile> {
        self.check(u)?;
        let mut spectrum = self.forward(&u.values);
        let peak = spectrum.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        let nyquist = self.grid.n_points / 2;
        let i_pow = Complex64::new(0.0, 1.0).powu(j);
        for (k, c) in spectrum.iter_mut().enumerate() {
            if (j % 2 == 1 && k == nyquist) || c.norm() < noise_floor * peak {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= i_pow * self.xi[k].powi(j as i32);
            }
        }
        Ok(Profile { grid: self.grid, values: self.inverse(spectrum).0 })
    }

    /// Pointwise residual `|D|^α u + u - f(u)` and its max norm.
    pub fn residual(&self, u: &Profile, params: &ProblemParams) -> Result<(Profile, f64)> {
        let du = self.riesz(u, params.alpha)?;
        let values: Vec<f64> = du.values.iter().zip(&u.values).map(|(d, v)| d + v - params.f(*v)).collect();
        let max = values.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        Ok((Profile { grid: self.grid, values }, max))
    }

    /// Weinstein quotient
    /// `(∫||D|^{α/2}u|²)^{θ} (∫u²)^{θ(α-1)+1} / ∫|u|^{p+1}`, `θ = (p-1)/(2α)`,
    /// which is invariant under `u ↦ βu(λx)`.
    pub fn functional_j(&self, u: &Profile, params: &ProblemParams) -> Result<f64> {
        let du = self.riesz(u, params.alpha)?;
        let dx = self.grid.spacing();
        let kinetic: f64 = dx * u.values.iter().zip(&du.values).map(|(a, b)| a * b).sum::<f64>();
        let mass: f64 = trapezoid(&u.values.iter().map(|v| v * v).collect::<Vec<_>>(), dx);
        let potential: f64 = trapezoid(&u.values.iter().map(|v| v.abs().powf(params.p + 1.0)).collect::<Vec<_>>(), dx);
        if potential == 0.0 || !(potential.is_finite()) {
            return Err(Error::Degenerate("∫|u|^(p+1) vanishes".into()));
        }
        let theta = (params.p - 1.0) / (2.0 * params.alpha);
        Ok(kinetic.max(0.0).powf(theta) * mass.powf(theta * (params.alpha - 1.0) + 1.0) / potential)
    }
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 2]")))
    }
}

/// `|D|^α u` via FFT.
pub fn apply_riesz(u: &Profile, alpha: f64) -> Result<Profile> {
    Spectral::new(u.grid).riesz(u, alpha)
}

/// `(1 + |D|^α)^{-1} u`, the periodic convolution with `k`.
pub fn apply_resolvent(u: &Profile, alpha: f64) -> Result<Profile> {
    Spectral::new(u.grid).resolvent(u, alpha)
}

/// `j`-th spectral derivative without noise filtering.
pub fn derivative(u: &Profile, j: u32) -> Result<Profile> {
    Spectral::new(u.grid).derivative(u, j, 0.0)
}

/// Pointwise `f(u)`.
pub fn nonlinearity(u: &Profile, params: &ProblemParams) -> Profile {
    Profile { grid: u.grid, values: u.values.iter().map(|&v| params.f(v)).collect() }
}

/// `|D|^α u + u - f(u)` and its max norm.
pub fn residual(u: &Profile, params: &ProblemParams) -> Result<(Profile, f64)> {
    Spectral::new(u.grid).residual(u, params)
}

/// Gagliardo–Nirenberg (Weinstein) quotient of `u`.
pub fn functional_j(u: &Profile, params: &ProblemParams) -> Result<f64> {
    Spectral::new(u.grid).functional_j(u, params)
}

/// Periodic trapezoid rule.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    dx * values.iter().sum::<f64>()
}

/// Serialized profile: `{alpha, p, kind, L, N, values}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEnvelope {
    pub alpha: f64,
    pub p: f64,
    pub kind: NonlinearityKind,
    #[serde(rename = "L")]
    pub half_length: f64,
    #[serde(rename = "N")]
    pub n_points: usize,
    pub values: Vec<f64>,
}

impl ProfileEnvelope {
    pub fn new(profile: &Profile, params: &ProblemParams) -> Self {
        Self {
            alpha: params.alpha,
            p: params.p,
            kind: params.kind,
            half_length: profile.grid.half_length,
            n_points: profile.grid.n_points,
            values: profile.values.clone(),
        }
    }

    pub fn into_parts(self) -> Result<(Profile, ProblemParams)> {
        let grid = Grid::new(self.half_length, self.n_points)?;
        let params = ProblemParams { alpha: self.alpha, p: self.p, kind: self.kind };
        params.validate()?;
        Ok((Profile::new(grid, self.values)?, params))
    }
}

/// Writes `x,value` rows with 17 significant digits.
pub fn write_profile_csv<W: std::io::Write>(u: &Profile, mut out: W) -> Result<()> {
    writeln!(out, "x,value")?;
    for (j, v) in u.values.iter().enumerate() {
        writeln!(out, "{:.16e},{:.16e}", u.grid.x(j), v)?;
    }
    Ok(())
}

/// Reads the output of [`write_profile_csv`], recovering the grid.
pub fn read_profile_csv<R: std::io::BufRead>(input: R) -> Result<Profile> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "x,value" {
                return Err(Error::Data(format!("unexpected header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::Data(format!("short row {i}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Data(format!("row {i}: {e}")))
        };
        xs.push(parse(parts.next())?);
        vs.push(parse(parts.next())?);
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Data("profile CSV needs at least two rows".into()));
    }
    let grid = Grid::new(-xs[0], n)?;
    Profile::new(grid, vs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(l: f64, n: usize) -> Grid {
        Grid::new(l, n).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = grid(10.0, 64);
        assert_eq!(g.spacing() * 64.0, 20.0);
        assert_eq!(g.x(g.center_index()), 0.0);
        assert_eq!(g.x(g.mirror(5)), -g.x(5));
        assert!((g.wavenumber(63) + PI / 10.0).abs() < 1e-15);
        assert!((g.wavenumber(32) + 32.0 * PI / 10.0).abs() < 1e-12);
        assert!(Grid::new(1.0, 8).is_err());
        assert!(Grid::new(1.0, 100).is_err());
        assert!(Grid::new(0.0, 64).is_err());
    }

    #[test]
    fn riesz_eigenfunction_and_constant() {
        let g = grid(PI, 64);
        let omega = 3.0;
        let u = Profile::from_fn(g, |x| (omega * x).cos()).unwrap();
        let alpha = 1.3;
        let d = apply_riesz(&u, alpha).unwrap();
        for (j, v) in d.values.iter().enumerate() {
            assert!((v - omega.powf(alpha) * u.values[j]).abs() < 1e-12);
        }
        let c = Profile::from_fn(g, |_| 2.5).unwrap();
        assert!(apply_riesz(&c, 0.7).unwrap().max_abs() < 1e-13);
        let r = apply_resolvent(&c, 0.7).unwrap();
        assert!(r.values.iter().all(|v| (v - 2.5).abs() < 1e-13));
        let w = apply_resolvent(&u, alpha).unwrap();
        for (j, v) in w.values.iter().enumerate() {
            assert!(((1.0 + omega.powf(alpha)) * v - u.values[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn lorentzian_hilbert_identity() {
        // Periodization of 2/(1+x²) and of |D| applied to it, in closed form.
        let l = 200.0;
        let g = grid(l, 1 << 14);
        let a = PI / l;
        let u = Profile::from_fn(g, |x| a * a.sinh() / (a.cosh() - (a * x).cos())).unwrap();
        let d = apply_riesz(&u, 1.0).unwrap();
        for (j, v) in d.values.iter().enumerate() {
            let c = (a * g.x(j)).cos();
            let want = -a * a * (1.0 - a.cosh() * c) / (a.cosh() - c).powi(2);
            assert!((v - want).abs() < 1e-10, "x = {}: {v} vs {want}", g.x(j));
        }
        // Truncated samples differ by the periodic images of the x^-2 tail.
        let u = Profile::from_fn(g, |x| 2.0 / (1.0 + x * x)).unwrap();
        let d = apply_riesz(&u, 1.0).unwrap();
        let bound = 4.0 * 2.0 / (2.0 * l).powi(2);
        for (j, v) in d.values.iter().enumerate() {
            let x = g.x(j);
            if x.abs() <= 100.0 {
                assert!((v - 2.0 * (1.0 - x * x) / (1.0 + x * x).powi(2)).abs() < bound);
            }
        }
    }

    #[test]
    fn truncated_lorentzian_residual_decays_like_images() {
        // The continuum residual vanishes; the periodic images of the x^-2
        // tail leave about 3/L².
        let params = ProblemParams::new(1.0, 2.0, NonlinearityKind::IntegerPower).unwrap();
        let r = |l: f64| {
            let u = Profile::from_fn(grid(l, 1 << 15), |x| 2.0 / (1.0 + x * x)).unwrap();
            residual(&u, &params).unwrap().1
        };
        let (r400, r800) = (r(400.0), r(800.0));
        assert!(r400 < 3.2 / 400f64.powi(2), "{r400}");
        assert!(r800 < 1e-5, "{r800}");
        assert!((r400 / r800 - 4.0).abs() < 0.2, "{r400} {r800}");
    }

    #[test]
    fn functional_is_amplitude_and_dilation_invariant() {
        let params = ProblemParams::new(1.5, 2.0, NonlinearityKind::SignedPower).unwrap();
        let g = grid(200.0, 1 << 13);
        let u = Profile::from_fn(g, |x| (-x * x / 8.0).exp()).unwrap();
        let j0 = functional_j(&u, &params).unwrap();
        for beta in [0.3, 2.0, -1.7] {
            let v = Profile::from_fn(g, |x| beta * (-x * x / 8.0).exp()).unwrap();
            assert!((functional_j(&v, &params).unwrap() / j0 - 1.0).abs() < 1e-12);
        }
        // Dilation invariance holds up to the O(Δξ^{α+1}) sampling error of |ξ|^α.
        let v = Profile::from_fn(g, |x| (-x * x / 2.0).exp()).unwrap();
        assert!((functional_j(&v, &params).unwrap() / j0 - 1.0).abs() < 1e-5);
        assert!(matches!(functional_j(&Profile::zeros(g), &params), Err(Error::Degenerate(_))));
        let bo = ProblemParams::new(1.0, 2.0, NonlinearityKind::IntegerPower).unwrap();
        let q = Profile::from_fn(g, |x| 2.0 / (1.0 + x * x)).unwrap();
        let j = functional_j(&q, &bo).unwrap();
        assert!(j.is_finite() && j > 0.0);
    }

    #[test]
    fn derivative_of_smooth_profile() {
        let g = grid(40.0, 1024);
        let u = Profile::from_fn(g, |x| (-x * x).exp()).unwrap();
        let d1 = derivative(&u, 1).unwrap();
        let d2 = derivative(&u, 2).unwrap();
        for j in 0..g.n_points {
            let x = g.x(j);
            assert!((d1.values[j] + 2.0 * x * (-x * x).exp()).abs() < 1e-12);
            assert!((d2.values[j] - (4.0 * x * x - 2.0) * (-x * x).exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn envelope_and_csv_round_trip() {
        let params = ProblemParams::new(1.5, 2.0, NonlinearityKind::SignedPower).unwrap();
        let g = grid(5.0, 16);
        let u = Profile::from_fn(g, |x| 1.0 / (1.0 + x * x) + 1e-17 * x).unwrap();
        let env = ProfileEnvelope::new(&u, &params);
        let text = serde_json::to_string(&env).unwrap();
        assert!(text.contains("\"L\":5.0") && text.contains("\"N\":16"));
        let back: ProfileEnvelope = serde_json::from_str(&text).unwrap();
        let (v, p2) = back.into_parts().unwrap();
        assert_eq!(v, u);
        assert_eq!(p2, params);
        let mut buf = Vec::new();
        write_profile_csv(&u, &mut buf).unwrap();
        let w = read_profile_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(w, u);
    }

    #[test]
    fn non_finite_samples_rejected() {
        let g = grid(5.0, 16);
        let mut values = vec![0.0; 16];
        values[3] = f64::NAN;
        assert!(matches!(Profile::new(g, values.clone()), Err(Error::Data(_))));
        let u = Profile { grid: g, values };
        assert!(matches!(apply_riesz(&u, 1.0), Err(Error::Data(_))));
    }
}
