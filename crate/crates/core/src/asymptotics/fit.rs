//! Least-squares fits of algebraic tails.
//!
//! On a periodic box of half length `L` a tail `c |x|^{-s}` is seen together
//! with its images, `c P_s(x)` where
//! `P_s(x) = Σ_m |x + 2Lm|^{-s} = (2L)^{-s} [ζ(s, u) + ζ(s, 1 - u)]`,
//! `u = x / 2L`. Bases below are available in this periodized form and as
//! plain powers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{hurwitz_zeta, rising_factorial};
use crate::spectral::Profile;

/// Shape of one tail term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Basis {
    /// `|x|^{-s}`
    Power { s: f64 },
    /// `|x|^{-s} ln|x|`
    PowerLog { s: f64 },
    /// `(|x|^{-base})^{q}`: a nonlinear image of a tail, periodized as
    /// `P_base(x)^q`.
    Composite { base: f64, q: f64 },
}

impl Basis {
    /// Total decay exponent.
    pub fn order(&self) -> f64 {
        match *self {
            Basis::Power { s } | Basis::PowerLog { s } => s,
            Basis::Composite { base, q } => base * q,
        }
    }
}

/// Line (`None`) or periodic box of half length `L`.
pub type Period = Option<f64>;

/// `d^j/dx^j P_s(x)` for `0 < x < 2L`, or of `x^{-s}` on the line.
pub fn periodized_power(s: f64, x: f64, j: u32, period: Period) -> f64 {
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pre = sign * rising_factorial(s, j);
    match period {
        None => pre * x.powf(-(s + j as f64)),
        Some(l) => {
            let p = 2.0 * l;
            let u = x / p;
            let e = s + j as f64;
            pre * p.powf(-e) * (hurwitz_zeta(e, u) + sign * hurwitz_zeta(e, 1.0 - u))
        }
    }
}

/// Evaluates the `j`-th derivative of a basis function at `x > 0`.
pub fn eval_basis(b: &Basis, x: f64, j: u32, period: Period) -> f64 {
    match *b {
        Basis::Power { s } => periodized_power(s, x, j, period),
        Basis::PowerLog { s } => {
            // -∂/∂s of the power basis.
            let h = 1e-5 * s.max(1.0);
            -(periodized_power(s + h, x, j, period) - periodized_power(s - h, x, j, period)) / (2.0 * h)
        }
        Basis::Composite { base, q } => {
            // Chain rule through the periodized base.
            let g = periodized_power(base, x, 0, period);
            let g1 = || periodized_power(base, x, 1, period);
            let g2 = || periodized_power(base, x, 2, period);
            let p1 = q * g.powf(q - 1.0);
            let p2 = q * (q - 1.0) * g.powf(q - 2.0);
            match j {
                0 => g.powf(q),
                1 => p1 * g1(),
                2 => p2 * g1().powi(2) + p1 * g2(),
                3 => {
                    let (a, b, c) = (g1(), g2(), periodized_power(base, x, 3, period));
                    q * (q - 1.0) * (q - 2.0) * g.powf(q - 3.0) * a.powi(3) + 3.0 * p2 * a * b + p1 * c
                }
                _ => f64::NAN,
            }
        }
    }
}

/// Fit window `[lo, hi]` on the positive half line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::FitDomain(format!("invalid window [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// The window scaled by `factor` at both ends.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { lo: self.lo * factor, hi: self.hi * factor }
    }
}

/// Grid samples `(x, value)` of `u` inside the window (right half).
pub fn window_samples(u: &Profile, w: &Window) -> Result<Vec<(f64, f64)>> {
    let l = u.grid.half_length;
    if w.hi > 0.8 * l {
        return Err(Error::FitDomain(format!("window end {} exceeds 0.8 L = {}", w.hi, 0.8 * l)));
    }
    let pts: Vec<(f64, f64)> = u.right_half().filter(|(x, _)| *x >= w.lo && *x <= w.hi).collect();
    if pts.len() < 32 {
        return Err(Error::FitDomain(format!("only {} grid points in [{}, {}]", pts.len(), w.lo, w.hi)));
    }
    Ok(pts)
}

/// At most `max` points, evenly spaced in `ln x`.
fn thin_log(pts: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    if pts.len() <= max {
        return pts.to_vec();
    }
    let (a, b) = (pts[0].0.ln(), pts[pts.len() - 1].0.ln());
    let mut out = Vec::with_capacity(max);
    let mut idx = 0usize;
    for i in 0..max {
        let target = a + (b - a) * i as f64 / (max - 1) as f64;
        while idx + 1 < pts.len() && pts[idx + 1].0.ln() <= target {
            idx += 1;
        }
        if out.last().is_none_or(|p: &(f64, f64)| p.0 < pts[idx].0) {
            out.push(pts[idx]);
        }
    }
    out
}

const MAX_FIT_POINTS: usize = 800;

/// Plain log-log tail fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Decay exponent `β` in `c / x^β`.
    pub exponent: f64,
    pub coefficient: f64,
    pub r2: f64,
    /// `r² < 0.99`
    pub poor_fit: bool,
}

/// Least squares in log-log coordinates on the window; with
/// `model_exponent` only the coefficient is fitted. Signed data are fitted
/// through their absolute value and the sign is restored.
pub fn fit_tail(u: &Profile, window: &Window, model_exponent: Option<f64>) -> Result<TailFit> {
    let pts = window_samples(u, window)?;
    fit_points(&pts, model_exponent)
}

/// [`fit_tail`] on explicit samples.
pub fn fit_points(pts: &[(f64, f64)], model_exponent: Option<f64>) -> Result<TailFit> {
    let sign = one_sign(pts)?;
    let data: Vec<(f64, f64)> = thin_log(pts, MAX_FIT_POINTS).iter().map(|(x, v)| (x.ln(), (v * sign).ln())).collect();
    let n = data.len() as f64;
    let mx = data.iter().map(|d| d.0).sum::<f64>() / n;
    let my = data.iter().map(|d| d.1).sum::<f64>() / n;
    let (slope, intercept) = match model_exponent {
        Some(beta) => (-beta, my + beta * mx),
        None => {
            let sxy: f64 = data.iter().map(|d| (d.0 - mx) * (d.1 - my)).sum();
            let sxx: f64 = data.iter().map(|d| (d.0 - mx).powi(2)).sum();
            let slope = sxy / sxx;
            (slope, my - slope * mx)
        }
    };
    let ss_tot: f64 = data.iter().map(|d| (d.1 - my).powi(2)).sum();
    let ss_res: f64 = data.iter().map(|d| (d.1 - intercept - slope * d.0).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(TailFit { exponent: -slope, coefficient: sign * intercept.exp(), r2, poor_fit: r2 < 0.99 })
}

fn one_sign(pts: &[(f64, f64)]) -> Result<f64> {
    let pos = pts.iter().all(|p| p.1 > 0.0);
    let neg = pts.iter().all(|p| p.1 < 0.0);
    match (pos, neg) {
        (true, _) => Ok(1.0),
        (_, true) => Ok(-1.0),
        _ => Err(Error::FitDomain("data change sign (or vanish) in the fit window".into())),
    }
}

/// Result of a joint linear fit over fixed bases.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// RMS of the weighted residual.
    pub weighted_rms: f64,
}

/// Weighted least squares `data ≈ Σ cᵢ Bᵢ^{(j)}` with weights
/// `1 / |B₀^{(j)}|`, so every point counts relative to the leading term.
pub fn joint_fit(pts: &[(f64, f64)], bases: &[Basis], j: u32, period: Period) -> Result<LinearFit> {
    let columns: Vec<Box<dyn Fn(f64) -> f64 + '_>> = bases
        .iter()
        .map(|b| Box::new(move |x| eval_basis(b, x, j, period)) as Box<dyn Fn(f64) -> f64>)
        .collect();
    joint_fit_columns(pts, &columns)
}

/// Weighted linear least squares on arbitrary column functions; the weight
/// is the reciprocal of the first column.
pub fn joint_fit_columns<F: Fn(f64) -> f64>(pts: &[(f64, f64)], columns: &[F]) -> Result<LinearFit> {
    if columns.is_empty() {
        return Err(Error::FitDomain("no basis functions".into()));
    }
    let pts = thin_log(pts, MAX_FIT_POINTS);
    if pts.len() < columns.len() + 2 {
        return Err(Error::FitDomain("too few points for the number of bases".into()));
    }
    let rows = pts.len();
    let cols = columns.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (i, (x, v)) in pts.iter().enumerate() {
        let w = 1.0 / columns[0](*x).abs();
        if !w.is_finite() {
            return Err(Error::FitDomain(format!("leading basis vanishes at x = {x}")));
        }
        for (k, c) in columns.iter().enumerate() {
            a[(i, k)] = w * c(*x);
        }
        rhs[i] = w * v;
    }
    // Column scaling for conditioning.
    let scales: Vec<f64> = (0..cols).map(|k| a.column(k).norm().max(1e-300)).collect();
    for (k, s) in scales.iter().enumerate() {
        a.column_mut(k).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-13).map_err(|e| Error::Degenerate(e.to_string()))?;
    let coefficients: Vec<f64> = sol.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let resid = &rhs - &a * &sol;
    Ok(LinearFit { coefficients, weighted_rms: resid.norm() / (rows as f64).sqrt() })
}

/// Family used for a free-exponent fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `P_s`
    Power,
    /// `P_base^{s/base}`
    Composite { base: f64 },
}

impl Family {
    pub fn basis(&self, s: f64) -> Basis {
        match *self {
            Family::Power => Basis::Power { s },
            Family::Composite { base } => Basis::Composite { base, q: s / base },
        }
    }
}

/// Free-exponent fit of `c · B_s` in log coordinates: for each `s` the
/// log-coefficient is the mean offset, and `s` minimizes the squared
/// log residual (golden-section search after a coarse scan).
pub fn free_exponent_fit(pts: &[(f64, f64)], family: Family, j: u32, period: Period) -> Result<TailFit> {
    // Periodized sums converge only for s > 1.
    let s_min = if period.is_some() { 1.0 } else { 0.05 };
    free_exponent_fit_with(pts, |s, x| eval_basis(&family.basis(s), x, j, period), s_min)
}

/// Free-exponent fit against an arbitrary one-parameter shape `g(s, x)`:
/// minimizes the spread of `ln|y| - ln|g(s, x)|` over `s ∈ (s_min, 20]`.
pub fn free_exponent_fit_with(pts: &[(f64, f64)], shape: impl Fn(f64, f64) -> f64, s_min: f64) -> Result<TailFit> {
    let sign = one_sign(pts)?;
    let pts = thin_log(pts, MAX_FIT_POINTS);
    let logs: Vec<f64> = pts.iter().map(|p| (p.1 * sign).ln()).collect();
    let eval = |s: f64| -> (f64, f64) {
        let mut diffs = Vec::with_capacity(pts.len());
        for (p, ly) in pts.iter().zip(&logs) {
            diffs.push(ly - shape(s, p.0).abs().ln());
        }
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let sse = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>();
        (if sse.is_finite() { sse } else { f64::INFINITY }, mean)
    };
    const STEP: f64 = 0.05;
    let lo = s_min + 1e-3;
    let (mut best_s, mut best) = (lo, f64::INFINITY);
    let mut s = lo;
    while s <= 20.0 {
        let (sse, _) = eval(s);
        if sse < best {
            best = sse;
            best_s = s;
        }
        s += STEP;
    }
    let (mut a, mut b) = ((best_s - STEP).max(lo), best_s + STEP);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (eval(c).0, eval(d).0);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval(c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval(d).0;
        }
    }
    let s = 0.5 * (a + b);
    let (sse, mean) = eval(s);
    let my = logs.iter().sum::<f64>() / logs.len() as f64;
    let ss_tot: f64 = logs.iter().map(|l| (l - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - sse / ss_tot } else { 1.0 };
    Ok(TailFit { exponent: s, coefficient: sign * mean.exp(), r2, poor_fit: r2 < 0.99 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn exact_power_recovered() {
        let grid = Grid::new(400.0, 1 << 13).unwrap();
        let u = Profile::from_fn(grid, |x| 3.5 * x.abs().max(1e-3).powf(-2.7)).unwrap();
        let fit = fit_tail(&u, &Window::new(20.0, 200.0).unwrap(), None).unwrap();
        assert!((fit.exponent - 2.7).abs() < 1e-10);
        assert!((fit.coefficient - 3.5).abs() < 1e-9);
        let fixed = fit_tail(&u, &Window::new(20.0, 200.0).unwrap(), Some(2.7)).unwrap();
        assert!((fixed.coefficient - 3.5).abs() < 1e-9);
    }

    #[test]
    fn lorentzian_tail() {
        let grid = Grid::new(400.0, 1 << 14).unwrap();
        let u = Profile::from_fn(grid, |x| 2.0 / (1.0 + x * x)).unwrap();
        let fit = fit_tail(&u, &Window::new(50.0, 150.0).unwrap(), None).unwrap();
        assert!((fit.exponent - 2.0).abs() < 0.02);
        assert!((fit.coefficient / 2.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn window_checks() {
        let grid = Grid::new(100.0, 1 << 10).unwrap();
        let u = Profile::from_fn(grid, |x| x.cos()).unwrap();
        assert!(matches!(fit_tail(&u, &Window::new(10.0, 70.0).unwrap(), None), Err(Error::FitDomain(_))));
        assert!(matches!(fit_tail(&u, &Window::new(10.0, 90.0).unwrap(), None), Err(Error::FitDomain(_))));
        assert!(matches!(fit_tail(&u, &Window::new(10.0, 11.0).unwrap(), None), Err(Error::FitDomain(_))));
        assert!(Window::new(5.0, 2.0).is_err());
    }

    #[test]
    fn periodized_power_matches_image_sum() {
        let l = 50.0;
        for (s, x, j) in [(2.5, 10.0, 0), (3.0, 37.0, 1), (1.8, 80.0, 2), (2.2, 5.0, 3)] {
            let mut direct = 0.0;
            for m in -20000i64..=20000 {
                let y = x + 2.0 * l * m as f64;
                let sign = if y < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 };
                direct += sign * periodized_power(s, y.abs(), j, None);
            }
            let z = periodized_power(s, x, j, Some(l));
            assert!(((z - direct) / z).abs() < 1e-6, "s {s} x {x} j {j}: {z} vs {direct}");
        }
    }

    #[test]
    fn joint_fit_separates_close_orders() {
        let l = 300.0;
        let pts: Vec<(f64, f64)> = (0..400)
            .map(|i| {
                let x = 20.0 + i as f64 * 0.4;
                let v = 1.7 * periodized_power(2.5, x, 0, Some(l)) - 0.4 * periodized_power(4.0, x, 0, Some(l))
                    + 2.0 * periodized_power(4.5, x, 0, Some(l));
                (x, v)
            })
            .collect();
        let bases = [Basis::Power { s: 2.5 }, Basis::Power { s: 4.0 }, Basis::Power { s: 4.5 }];
        let fit = joint_fit(&pts, &bases, 0, Some(l)).unwrap();
        assert!((fit.coefficients[0] - 1.7).abs() < 1e-9);
        assert!((fit.coefficients[1] + 0.4).abs() < 1e-6);
        assert!((fit.coefficients[2] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn free_fit_recovers_periodized_exponent() {
        let l = 200.0;
        let pts: Vec<(f64, f64)> = (0..300).map(|i| 20.0 + i as f64 * 0.3).map(|x| (x, -0.8 * periodized_power(3.3, x, 1, Some(l)))).collect();
        let fit = free_exponent_fit(&pts, Family::Power, 1, Some(l)).unwrap();
        assert!((fit.exponent - 3.3).abs() < 1e-6, "{}", fit.exponent);
        let comp: Vec<(f64, f64)> = (0..300)
            .map(|i| 20.0 + i as f64 * 0.3)
            .map(|x| (x, eval_basis(&Basis::Composite { base: 2.5, q: 1.2 }, x, 0, Some(l))))
            .collect();
        let fit = free_exponent_fit(&comp, Family::Composite { base: 2.5 }, 0, Some(l)).unwrap();
        assert!((fit.exponent - 3.0).abs() < 1e-6);
    }

    #[test]
    fn composite_derivatives_match_finite_differences() {
        let b = Basis::Composite { base: 2.5, q: 1.2 };
        let l = Some(100.0);
        let x = 30.0;
        let h = 1e-2;
        let f = |t: f64| eval_basis(&b, t, 0, l);
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        assert!((eval_basis(&b, x, 1, l) / d1 - 1.0).abs() < 1e-5);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        assert!((eval_basis(&b, x, 2, l) / d2 - 1.0).abs() < 1e-4);
    }
}
