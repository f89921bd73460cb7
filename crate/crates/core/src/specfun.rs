//! The functions `h(y) = ∫₀^∞ cos(yη) e^{-η^α} dη`, the resolvent kernel
//! `k = F⁻¹(1 / (1 + |ξ|^α))`, its derivative, and the large-`x` expansion
//! `k(x) ~ Σ kₙ / |x|^{nα+1}`.
//!
//! `k` is computed from
//! `k(x) = (1/π) ∫₀^∞ e^{-s} s^{-1/α} h(x s^{-1/α}) ds`, where `h` comes
//! from the non-oscillatory rotated-contour integrand for `y ≥ 1/2` and from
//! damped-cosine quadrature with epsilon acceleration below.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{exp_sinh, gauss_kronrod, oscillatory, tanh_sinh, Estimate, Tolerance};
use crate::special::gamma;

/// Below this argument `h` is computed by direct damped-cosine quadrature.
const ROTATED_MIN_Y: f64 = 0.5;
/// `e^{-η^α}` is below `e^{-40}` past `η = 40^{1/α}`.
const DECAY_EXPONENT: f64 = 40.0;
const MAX_PIECES: usize = 4000;
/// Floor on the tolerance handed to inner quadratures.
const MIN_REL_TOL: f64 = 1e-13;

/// Accuracy and path-selection controls for the kernel evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub quad_rel_tol: f64,
    /// `|x|` beyond which `k` may use its series.
    pub crossover_x: f64,
    /// `|y|` beyond which `h` may use its series.
    pub crossover_h: f64,
    /// Number of series terms used beyond the crossover.
    pub series_terms: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { quad_rel_tol: 1e-10, crossover_x: 8.0, crossover_h: 10.0, series_terms: 6 }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.quad_rel_tol > 0.0) {
            return Err(Error::Domain(format!("quad_rel_tol = {} must be > 0", self.quad_rel_tol)));
        }
        if !(self.crossover_x > 1.0) || !(self.crossover_h > 1.0) {
            return Err(Error::Domain("crossover thresholds must exceed 1".into()));
        }
        if self.series_terms == 0 {
            return Err(Error::Domain("series_terms must be positive".into()));
        }
        Ok(())
    }

    fn inner_tol(&self) -> f64 {
        (0.1 * self.quad_rel_tol).max(MIN_REL_TOL)
    }
}

/// Which evaluation path produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    Quadrature,
    Series,
}

/// A value with its error estimate and the path used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub abs_err: f64,
    pub path: EvalPath,
}

fn check_alpha(alpha: f64, allow_two: bool) -> Result<()> {
    let ok = alpha > 0.0 && (alpha < 2.0 || (allow_two && alpha == 2.0));
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 2)")))
    }
}

/// Number of the first coefficient that is taken from the general pattern
/// rather than the closed forms for `n = 1, 2`.
pub const FIRST_EXTRAPOLATED: usize = 3;

/// `kₙ = (-1)^{n+1} sin(nπα/2) Γ(nα+1) / π`.
///
/// For `n = 1, 2` this reduces to `sin(πα/2)Γ(α+1)/π` and
/// `-sin(πα)Γ(2α+1)/π`; see [`is_extrapolated`] for `n ≥ 3`.
pub fn kernel_coefficient(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("kernel coefficients are indexed from n = 1".into()));
    }
    check_alpha(alpha, true)?;
    let nf = n as f64;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let s = (nf * PI * alpha / 2.0).sin();
    // sin(nπα/2) is exactly zero when nα is an even integer.
    let na = nf * alpha;
    let s = if na.fract() == 0.0 && (na as u64).is_multiple_of(2) { 0.0 } else { s };
    Ok(sign * s * gamma(na + 1.0) / PI)
}

/// Whether `kₙ` comes from the general pattern rather than a closed form.
pub fn is_extrapolated(n: usize) -> bool {
    n >= FIRST_EXTRAPOLATED
}

/// Coefficients `k₁..k_N` of the large-`x` expansion of `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSeries {
    pub alpha: f64,
    pub coeffs: Vec<f64>,
    pub n_terms: usize,
    /// True when some coefficient comes from the general pattern (`n ≥ 3`).
    pub extrapolated: bool,
}

impl KernelSeries {
    pub fn new(alpha: f64, n_terms: usize) -> Result<Self> {
        check_alpha(alpha, true)?;
        if n_terms == 0 {
            return Err(Error::Domain("a kernel series needs at least one term".into()));
        }
        let coeffs = (1..=n_terms).map(|n| kernel_coefficient(n, alpha)).collect::<Result<Vec<_>>>()?;
        Ok(Self { alpha, coeffs, n_terms, extrapolated: is_extrapolated(n_terms) })
    }

    /// `Σ kₙ |x|^{-(nα+1)}`, without domain checks.
    fn sum(&self, ax: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * ax.powf(-((i + 1) as f64 * self.alpha + 1.0)))
            .sum()
    }

    /// `-sign(x) Σ (nα+1) kₙ |x|^{-(nα+2)}`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        if !(ax > 1.0) {
            return Err(Error::Domain(format!("series is not valid at |x| = {ax} <= 1")));
        }
        let s: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let e = (i + 1) as f64 * self.alpha + 1.0;
                e * c * ax.powf(-(e + 1.0))
            })
            .sum();
        Ok(-x.signum() * s)
    }
}

/// Partial sum `Σ_{n≤N} kₙ / |x|^{nα+1}`.
pub fn k_series_eval(x: f64, series: &KernelSeries) -> Result<f64> {
    let ax = x.abs();
    if !(ax > 1.0) {
        return Err(Error::Domain(format!("series is not valid at |x| = {ax} <= 1")));
    }
    Ok(series.sum(ax))
}

/// `h(0) = Γ(1/α)/α`.
pub fn h_at_zero(alpha: f64) -> f64 {
    gamma(1.0 / alpha) / alpha
}

/// Partial sum `Σ_{n≤N} π kₙ / (n! y^{nα+1})` of the large-`y` expansion
/// of `h`.
pub fn h_series_eval(y: f64, alpha: f64, n_terms: usize) -> Result<f64> {
    check_alpha(alpha, true)?;
    let ay = y.abs();
    if !(ay > 1.0) {
        return Err(Error::Domain(format!("series is not valid at |y| = {ay} <= 1")));
    }
    let mut sum = 0.0;
    let mut fact = 1.0;
    for n in 1..=n_terms {
        fact *= n as f64;
        sum += PI * kernel_coefficient(n, alpha)? / fact * ay.powf(-(n as f64 * alpha + 1.0));
    }
    Ok(sum)
}

/// Largest nonzero magnitude among the next two terms, as a truncation
/// estimate (one of them can vanish identically, e.g. `k₂` at `α = 1`).
fn next_term_bound(mut term: impl FnMut(usize) -> f64, n_terms: usize) -> f64 {
    term(n_terms + 1).abs().max(term(n_terms + 2).abs())
}

/// Relative-accuracy scale for `h(y)`: the smaller of `h(0)` and the
/// leading tail term.
fn h_scale(y: f64, alpha: f64) -> f64 {
    let h0 = h_at_zero(alpha);
    if y <= 1.0 {
        return h0;
    }
    let k1 = kernel_coefficient(1, alpha).unwrap_or(0.0);
    let tail = (PI * k1).abs() * y.powf(-(alpha + 1.0));
    if tail > 0.0 {
        h0.min(tail)
    } else {
        h0
    }
}

/// `h(y)` by direct quadrature of the damped cosine, integrating between
/// consecutive zeros of `cos(yη)` and extrapolating the partial sums.
pub fn h_direct(y: f64, alpha: f64, rel_tol: f64) -> Result<Estimate> {
    check_alpha(alpha, true)?;
    let y = y.abs();
    let eta_max = DECAY_EXPONENT.powf(1.0 / alpha);
    let abs_tol = 1e-2 * rel_tol * h_scale(y, alpha);
    let first_zero = if y > 0.0 { 0.5 * PI / y } else { f64::INFINITY };
    if first_zero >= eta_max {
        let f = |eta: f64| (y * eta).cos() * (-eta.powf(alpha)).exp();
        return tanh_sinh(f, 0.0, eta_max, rel_tol, abs_tol)
            .or_else(|_| gauss_kronrod(f, 0.0, eta_max, Tolerance::relative(rel_tol).with_abs(abs_tol)));
    }
    oscillatory(|eta| (y * eta).cos() * (-eta.powf(alpha)).exp(), first_zero, PI / y, rel_tol, abs_tol, MAX_PIECES)
}

/// `y^{1+α} h(y)` from the rotated-contour integrand
/// `Im ∫₀^∞ exp((i-1) r^{1/α}/√2 - r e^{iθ}/y^α) e^{iθ} dr`, `θ = πα/4`.
fn rotated_scaled(y: f64, alpha: f64, rel_tol: f64) -> Result<Estimate> {
    let theta = 0.25 * PI * alpha;
    let (st, ct) = theta.sin_cos();
    let w = y.powf(-alpha);
    let inv_alpha = 1.0 / alpha;
    let f = |r: f64| {
        let a = FRAC_1_SQRT_2 * r.powf(inv_alpha);
        let re = -a - r * ct * w;
        let im = a - r * st * w + theta;
        re.exp() * im.sin()
    };
    exp_sinh(f, rel_tol, 0.0)
}

/// `h(y)` for `y > 0` from the rotated-contour representation.
pub fn h_eval_rotated(y: f64, alpha: f64, opts: &EvalOptions) -> Result<f64> {
    check_alpha(alpha, false)?;
    if !(y > 0.0) {
        return Err(Error::Domain(format!("rotated representation requires y > 0, got {y}")));
    }
    let est = rotated_scaled(y, alpha, opts.inner_tol())?;
    Ok(est.value / y.powf(1.0 + alpha))
}

/// Quadrature value of `h`, choosing the better-conditioned representation.
fn h_quadrature(y: f64, alpha: f64, rel_tol: f64) -> Result<Estimate> {
    let y = y.abs();
    if y >= ROTATED_MIN_Y && alpha < 2.0 {
        let scale = y.powf(-(1.0 + alpha));
        let est = rotated_scaled(y, alpha, rel_tol)?;
        Ok(Estimate { value: est.value * scale, abs_err: est.abs_err * scale })
    } else {
        h_direct(y, alpha, rel_tol)
    }
}

/// `h(y)` with path and error information.
pub fn h_eval_detailed(y: f64, alpha: f64, opts: &EvalOptions) -> Result<KernelValue> {
    check_alpha(alpha, true)?;
    opts.validate()?;
    let ay = y.abs();
    if ay > opts.crossover_h && alpha < 2.0 {
        let sum = h_series_eval(ay, alpha, opts.series_terms)?;
        let mut fact: f64 = (1..=opts.series_terms).map(|n| n as f64).product();
        let bound = next_term_bound(
            |n| {
                fact *= n as f64;
                PI * kernel_coefficient(n, alpha).unwrap_or(f64::INFINITY) / fact * ay.powf(-(n as f64 * alpha + 1.0))
            },
            opts.series_terms,
        );
        if bound <= opts.quad_rel_tol * sum.abs() {
            return Ok(KernelValue { value: sum, abs_err: bound, path: EvalPath::Series });
        }
    }
    let est = if alpha < 2.0 && ay >= ROTATED_MIN_Y && ay > 40.0 {
        h_quadrature(ay, alpha, opts.inner_tol())?
    } else {
        h_direct(ay, alpha, opts.inner_tol())?
    };
    Ok(KernelValue { value: est.value, abs_err: est.abs_err, path: EvalPath::Quadrature })
}

/// `h(y)`, even in `y`. Valid for `0 < α ≤ 2`.
pub fn h_eval(y: f64, alpha: f64, opts: &EvalOptions) -> Result<f64> {
    h_eval_detailed(y, alpha, opts).map(|v| v.value)
}

/// `h'(y) = -∫₀^∞ η sin(yη) e^{-η^α} dη`.
///
/// For `y ≥ 1/2` the rotated form
/// `y² h'(y) = -(1/2) Im ∫₀^∞ exp(√r e^{3iπ/4} - r^{α/2} e^{iπα/4}/y^α) i dr`
/// is used.
pub fn h_prime_eval(y: f64, alpha: f64, opts: &EvalOptions) -> Result<f64> {
    check_alpha(alpha, true)?;
    h_prime_quadrature(y, alpha, opts.inner_tol()).map(|e| e.value)
}

fn h_prime_quadrature(y: f64, alpha: f64, rel_tol: f64) -> Result<Estimate> {
    let sign = y.signum();
    let y = y.abs();
    if y == 0.0 {
        return Ok(Estimate { value: 0.0, abs_err: 0.0 });
    }
    let est = if y >= ROTATED_MIN_Y && alpha < 2.0 {
        let theta = 0.25 * PI * alpha;
        let (st, ct) = theta.sin_cos();
        let w = y.powf(-alpha);
        let half_alpha = 0.5 * alpha;
        let f = |r: f64| {
            let sr = FRAC_1_SQRT_2 * r.sqrt();
            let ra = r.powf(half_alpha) * w;
            // Re(exp(z)) with z = √r e^{3iπ/4} - r^{α/2} e^{iθ} / y^α
            (-sr - ra * ct).exp() * (sr - ra * st).cos()
        };
        let est = exp_sinh(f, rel_tol, 0.0)?;
        let scale = -0.5 / (y * y);
        Estimate { value: est.value * scale, abs_err: est.abs_err * scale.abs() }
    } else {
        let eta_max = DECAY_EXPONENT.powf(1.0 / alpha);
        let f = |eta: f64| -eta * (y * eta).sin() * (-eta.powf(alpha)).exp();
        // |h'(y)| ≈ y ∫ η² e^{-η^α} for small y.
        let abs_tol = 1e-2 * rel_tol * y * gamma(3.0 / alpha) / alpha;
        let first_zero = PI / y;
        if first_zero >= eta_max {
            tanh_sinh(f, 0.0, eta_max, rel_tol, abs_tol)?
        } else {
            oscillatory(f, first_zero, first_zero, rel_tol, abs_tol, MAX_PIECES)?
        }
    };
    Ok(Estimate { value: sign * est.value, abs_err: est.abs_err })
}

/// Outer integral over `s` of `e^{-s} s^{-m/α} g(x s^{-1/α})`, split where
/// `x s^{-1/α}` crosses the inner path switch. Beyond the split the
/// variable `v = ln s` is used, which keeps the integrand smooth for tiny `x`.
fn outer_integral<G: FnMut(f64) -> Result<Estimate>>(
    x: f64,
    alpha: f64,
    power: f64,
    rel_tol: f64,
    mut inner: G,
) -> Result<Estimate> {
    let s_max = 45.0 + (alpha + 2.0) * x.max(1.0).ln();
    let s_switch = (x / ROTATED_MIN_Y).powf(alpha).min(s_max);
    let mut failure: Option<Error> = None;
    let mut inner_err = 0.0;
    let mut weighted = |s: f64, jac: f64| -> f64 {
        if s <= 0.0 || failure.is_some() {
            return 0.0;
        }
        let y = x * s.powf(-1.0 / alpha);
        match inner(y) {
            Ok(e) => {
                let w = (-s).exp() * s.powf(-power) * jac;
                inner_err += (w * e.abs_err).abs();
                w * e.value
            }
            Err(err) => {
                failure = Some(err);
                0.0
            }
        }
    };
    let tol = Tolerance::relative(rel_tol);
    let a = gauss_kronrod(|s| weighted(s, 1.0), 0.0, s_switch, tol)?;
    let b = if s_switch < s_max {
        
        gauss_kronrod(
            |v: f64| {
                let s = v.exp();
                weighted(s, s)
            },
            s_switch.ln(),
            s_max.ln(),
            tol.with_abs(1e-2 * rel_tol * a.value.abs()),
        )?
    } else {
        Estimate { value: 0.0, abs_err: 0.0 }
    };
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(Estimate { value: (a.value + b.value) / PI, abs_err: (a.abs_err + b.abs_err + inner_err) / PI })
}

/// `k(x)` by quadrature of `(1/π) ∫₀^∞ e^{-s} s^{-1/α} h(x s^{-1/α}) ds`,
/// regardless of the crossover.
pub fn k_quadrature(x: f64, alpha: f64, opts: &EvalOptions) -> Result<Estimate> {
    check_alpha(alpha, false)?;
    opts.validate()?;
    let ax = x.abs();
    let inner_tol = opts.inner_tol();
    if ax == 0.0 {
        if alpha <= 1.0 {
            return Err(Error::Singularity { alpha });
        }
        let h0 = h_direct(0.0, alpha, inner_tol)?;
        let est = exp_sinh(|s| (-s).exp() * s.powf(-1.0 / alpha), inner_tol, 0.0)?;
        return Ok(Estimate { value: h0.value * est.value / PI, abs_err: (h0.abs_err * est.value + h0.value * est.abs_err) / PI });
    }
    outer_integral(ax, alpha, 1.0 / alpha, opts.quad_rel_tol, |y| h_quadrature(y, alpha, inner_tol))
}

/// `k(x)` with path and error information.
pub fn k_eval_detailed(x: f64, alpha: f64, opts: &EvalOptions) -> Result<KernelValue> {
    check_alpha(alpha, false)?;
    opts.validate()?;
    let ax = x.abs();
    if ax > opts.crossover_x {
        let series = KernelSeries::new(alpha, opts.series_terms)?;
        let sum = series.sum(ax);
        let bound = next_term_bound(
            |n| kernel_coefficient(n, alpha).unwrap_or(f64::INFINITY) * ax.powf(-(n as f64 * alpha + 1.0)),
            opts.series_terms,
        );
        if bound <= opts.quad_rel_tol * sum.abs() {
            return Ok(KernelValue { value: sum, abs_err: bound, path: EvalPath::Series });
        }
    }
    let est = k_quadrature(ax, alpha, opts)?;
    Ok(KernelValue { value: est.value, abs_err: est.abs_err, path: EvalPath::Quadrature })
}

/// The resolvent kernel `k(x)`, even in `x`.
///
/// Beyond `crossover_x` the series is used when its next-term estimate is
/// within `quad_rel_tol`; otherwise quadrature is used.
pub fn k_eval(x: f64, alpha: f64, opts: &EvalOptions) -> Result<f64> {
    k_eval_detailed(x, alpha, opts).map(|v| v.value)
}

/// `k'(x)` for `1 < α < 2`, `x ≠ 0`; odd in `x`.
pub fn k_prime_eval(x: f64, alpha: f64, opts: &EvalOptions) -> Result<f64> {
    check_alpha(alpha, false)?;
    opts.validate()?;
    if alpha <= 1.0 {
        return Err(Error::Unsupported(format!("k' is only evaluated for 1 < alpha < 2, got {alpha}")));
    }
    if x == 0.0 {
        return Err(Error::Domain("k' is evaluated only for x != 0".into()));
    }
    let ax = x.abs();
    if ax > opts.crossover_x {
        let series = KernelSeries::new(alpha, opts.series_terms)?;
        let d = series.derivative(ax)?;
        let bound = next_term_bound(
            |n| {
                let e = n as f64 * alpha + 1.0;
                e * kernel_coefficient(n, alpha).unwrap_or(f64::INFINITY) * ax.powf(-(e + 1.0))
            },
            opts.series_terms,
        );
        if bound <= opts.quad_rel_tol * d.abs() {
            return Ok(x.signum() * d);
        }
    }
    let inner_tol = opts.inner_tol();
    let est = outer_integral(ax, alpha, 2.0 / alpha, opts.quad_rel_tol, |y| h_prime_quadrature(y, alpha, inner_tol))?;
    Ok(x.signum() * est.value)
}

/// `∫_ℝ k` from composite quadrature over `[-cutoff, cutoff]` plus the
/// series tail `2 Σ kₙ cutoff^{-nα} / (nα)`.
///
/// `[0, 1]` is integrated with the tanh-sinh rule, which absorbs the
/// `x^{α-1} |ln x|` behaviour at the origin; the rest with Gauss–Kronrod.
pub fn kernel_integral(alpha: f64, cutoff: f64, opts: &EvalOptions) -> Result<Estimate> {
    check_alpha(alpha, false)?;
    opts.validate()?;
    if !(cutoff > 1.0) {
        return Err(Error::Domain("cutoff must exceed 1".into()));
    }
    let rel_tol = opts.quad_rel_tol;
    let k_opts = EvalOptions { quad_rel_tol: 0.1 * rel_tol, ..*opts };
    let mut failure = None;
    let mut f = |x: f64| {
        if x <= 0.0 || failure.is_some() {
            return 0.0;
        }
        match k_quadrature(x, alpha, &k_opts) {
            Ok(e) => e.value,
            Err(err) => {
                failure = Some(err);
                0.0
            }
        }
    };
    let head = tanh_sinh(&mut f, 0.0, 1.0, rel_tol, 0.0)?;
    let mut value = head.value;
    let mut abs_err = head.abs_err;
    let tol = Tolerance::relative(rel_tol).with_abs(1e-3 * rel_tol);
    let mut a = 1.0;
    while a < cutoff {
        let b = (10.0 * a).min(cutoff);
        let est = gauss_kronrod(&mut f, a, b, tol)?;
        value += est.value;
        abs_err += est.abs_err;
        a = b;
    }
    if let Some(err) = failure {
        return Err(err);
    }
    // Tail terms decrease for a while and then grow; stop at the smallest.
    let mut tail = 0.0;
    let mut last = f64::INFINITY;
    for n in 1..=40 {
        let na = n as f64 * alpha;
        let term = kernel_coefficient(n, alpha)? * cutoff.powf(-na) / na;
        if term == 0.0 {
            continue;
        }
        if term.abs() > last {
            break;
        }
        tail += term;
        last = term.abs();
        if last < 1e-17 {
            break;
        }
    }
    Ok(Estimate { value: 2.0 * (value + tail), abs_err: 2.0 * (abs_err + last) })
}

/// Estimate of `kₙ` from quadrature values of `k`: the residual
/// `(k(x) - Σ_{m<n} k_m x^{-(mα+1)}) x^{nα+1}` is fitted as `c + d x^{-α}`
/// on the given abscissae.
pub fn fitted_coefficient(n: usize, alpha: f64, xs: &[f64], opts: &EvalOptions) -> Result<f64> {
    if n == 0 || xs.len() < 2 {
        return Err(Error::Domain("need n >= 1 and at least two abscissae".into()));
    }
    let lower = if n > 1 { Some(KernelSeries::new(alpha, n - 1)?) } else { None };
    let mut sxx = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxy = 0.0;
    for &x in xs {
        let k = k_quadrature(x, alpha, opts)?.value;
        let partial = lower.as_ref().map_or(0.0, |s| s.sum(x));
        let r = (k - partial) * x.powf(n as f64 * alpha + 1.0);
        let t = x.powf(-alpha);
        sx += t;
        sxx += t * t;
        sy += r;
        sxy += t * r;
    }
    let m = xs.len() as f64;
    let det = m * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::Degenerate("abscissae do not separate the fit".into()));
    }
    Ok((sxx * sy - sx * sxy) / det)
}

/// One row of a kernel tabulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub x: f64,
    pub k_quadrature: f64,
    /// Series value where the series is defined (`|x| > 1`).
    pub k_series: Option<f64>,
    pub abs_diff: Option<f64>,
}

/// Tabulates quadrature and series values of `k` on `xs`.
pub fn tabulate_kernel(xs: &[f64], alpha: f64, n_terms: usize, opts: &EvalOptions) -> Result<Vec<KernelRow>> {
    let series = KernelSeries::new(alpha, n_terms)?;
    xs.iter()
        .map(|&x| {
            let kq = k_quadrature(x, alpha, opts)?.value;
            let ks = k_series_eval(x, &series).ok();
            Ok(KernelRow { x, k_quadrature: kq, k_series: ks, abs_diff: ks.map(|s| (s - kq).abs()) })
        })
        .collect()
}

/// Writes rows as CSV with columns `x,k_quadrature,k_series,abs_diff`
/// (17 significant digits; empty cells where the series is undefined).
pub fn write_kernel_csv<W: std::io::Write>(rows: &[KernelRow], mut out: W) -> Result<()> {
    writeln!(out, "x,k_quadrature,k_series,abs_diff")?;
    let cell = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.16e}"));
    for r in rows {
        writeln!(out, "{:.16e},{:.16e},{},{}", r.x, r.k_quadrature, cell(r.k_series), cell(r.abs_diff))?;
    }
    Ok(())
}
