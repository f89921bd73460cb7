//! Tail coefficients of ground states and quantitative checks of their
//! algebraic expansions.

pub mod fit;
pub mod model;
pub mod report;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::specfun::{kernel_coefficient, kernel_integral, EvalOptions};
use crate::spectral::{trapezoid, Profile};

pub use fit::{fit_tail, TailFit, Window};
pub use model::Moments;
pub use report::{verify_all, SweepRow, VerificationReport, VerifyOptions};
pub use verify::{
    conv_decay_check, conv_decay_sup, default_window, odd_moments, spectral_decay_diagnostic, verify_cubic_third_order,
    verify_derivative_order, verify_first_order, verify_second_order, ConvDecay, Status, TailReport,
};

/// Cutoff of the truncated quadrature in `∫k`; the rest is the series tail.
const INTEGRAL_K_CUTOFF: f64 = 100.0;

/// Expansion constants of a ground state.
///
/// `a3` and `integral_x2fq` are `None` when `∫x² f(Q)` diverges, i.e. when
/// `p(α+1) ≤ 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: Option<f64>,
    pub a1_tilde: f64,
    #[serde(rename = "integral_fQ")]
    pub integral_fq: f64,
    #[serde(rename = "integral_x2fQ")]
    pub integral_x2fq: Option<f64>,
    pub integral_k: f64,
    /// Relative size of the tail continuation added to `∫f(Q)`.
    pub tail_correction: f64,
}

impl TailCoefficients {
    /// Coefficients from the three integrals.
    pub fn from_integrals(
        params: &ProblemParams,
        integral_fq: f64,
        integral_x2fq: Option<f64>,
        integral_k: f64,
    ) -> Result<Self> {
        let alpha = params.alpha;
        let k1 = kernel_coefficient(1, alpha)?;
        let k2 = kernel_coefficient(2, alpha)?;
        let a1 = k1 * integral_fq;
        let a1_pow = a1.abs().powf(params.p) * a1.signum();
        Ok(Self {
            a1,
            a2: k2 * integral_fq,
            a3: integral_x2fq.map(|m2| 0.5 * (alpha + 1.0) * (alpha + 2.0) * k1 * m2),
            a1_tilde: a1_pow * integral_k,
            integral_fq,
            integral_x2fq,
            integral_k,
            tail_correction: 0.0,
        })
    }

    /// Even moments `∫x^{2m} f(Q)` consistent with these coefficients.
    pub fn moments(&self, q: &Profile, params: &ProblemParams) -> Moments {
        let mut m = Moments::from_profile(q, params, self.a1);
        if let Some(first) = m.even.first_mut() {
            *first = Some(self.integral_fq);
        }
        m
    }
}

/// Checks that `q` peaks at `x = 0` and is even.
pub fn check_centered(q: &Profile) -> Result<()> {
    let c = q.grid.center_index();
    let peak = q.max_abs();
    if peak == 0.0 {
        return Err(Error::Precondition("profile vanishes identically".into()));
    }
    if q.values[c].abs() < peak {
        return Err(Error::Precondition("profile is not centered: maximum away from x = 0".into()));
    }
    let asym = (1..q.grid.n_points).map(|j| (q.values[j] - q.values[q.grid.mirror(j)]).abs()).fold(0.0, f64::max);
    if asym > 1e-8 * peak {
        return Err(Error::Precondition(format!("profile is not even (asymmetry {asym:.2e})")));
    }
    Ok(())
}

/// Integrals on the grid with the leading tail `a₁^p |x|^{-p(α+1)}`
/// continued beyond `±L`, and `∫k` from the kernel module.
pub fn tail_coefficients(q: &Profile, params: &ProblemParams, opts: &EvalOptions) -> Result<TailCoefficients> {
    let integral_k = kernel_integral(params.alpha, INTEGRAL_K_CUTOFF, opts)?.value;
    tail_coefficients_with(q, params, integral_k)
}

/// [`tail_coefficients`] with a precomputed `∫k`.
pub fn tail_coefficients_with(q: &Profile, params: &ProblemParams, integral_k: f64) -> Result<TailCoefficients> {
    check_centered(q)?;
    let grid = q.grid;
    let dx = grid.spacing();
    let l = grid.half_length;
    let f: Vec<f64> = q.values.iter().map(|&v| params.f(v)).collect();
    let box_fq = trapezoid(&f, dx);
    let decay = params.p * (params.alpha + 1.0);
    let a1_box = kernel_coefficient(1, params.alpha)? * box_fq;
    let amp = a1_box.abs().powf(params.p) * a1_box.signum();
    let corr0 = 2.0 * amp * l.powf(1.0 - decay) / (decay - 1.0);
    let integral_fq = box_fq + corr0;
    let integral_x2fq = (decay > 3.0).then(|| {
        let m2: f64 = f.iter().enumerate().map(|(j, v)| grid.x(j).powi(2) * v).sum::<f64>() * dx;
        m2 + 2.0 * amp * l.powf(3.0 - decay) / (decay - 3.0)
    });
    let mut c = TailCoefficients::from_integrals(params, integral_fq, integral_x2fq, integral_k)?;
    c.tail_correction = if integral_fq != 0.0 { corr0 / integral_fq } else { 0.0 };
    Ok(c)
}

/// Second-order regime of a positive ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `p < (2α+1)/(α+1)`: the `ã₁ x^{-p(α+1)}` term comes second.
    NonlinearDominated,
    /// `p = (2α+1)/(α+1)`: both terms share the order `2α+1`.
    Balanced,
    /// `p > (2α+1)/(α+1)`: the `a₂ x^{-(2α+1)}` term comes second.
    DispersionDominated,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::NonlinearDominated => "nonlinear_dominated",
            Regime::Balanced => "balanced",
            Regime::DispersionDominated => "dispersion_dominated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClass {
    pub value: Regime,
    /// `(2α+1)/(α+1)`
    pub threshold: f64,
    /// Decay exponent of `Q - a₁ x^{-(α+1)}`.
    pub predicted_residual_exponent: f64,
}

/// Half width of the band around the threshold classified as balanced.
pub const BALANCED_TOLERANCE: f64 = 1e-12;

pub fn classify_regime(params: &ProblemParams) -> RegimeClass {
    let alpha = params.alpha;
    let threshold = (2.0 * alpha + 1.0) / (alpha + 1.0);
    let d = params.p - threshold;
    let value = if d.abs() <= BALANCED_TOLERANCE {
        Regime::Balanced
    } else if d < 0.0 {
        Regime::NonlinearDominated
    } else {
        Regime::DispersionDominated
    };
    let predicted_residual_exponent = match value {
        Regime::NonlinearDominated => params.p * (alpha + 1.0),
        _ => 2.0 * alpha + 1.0,
    };
    RegimeClass { value, threshold, predicted_residual_exponent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::NonlinearityKind;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn regime_examples() {
        let r = classify_regime(&ProblemParams::new(1.5, 1.2, NonlinearityKind::SignedPower).unwrap());
        assert_eq!(r.value, Regime::NonlinearDominated);
        assert!((r.threshold - 1.6).abs() < 1e-15);
        assert!((r.predicted_residual_exponent - 3.0).abs() < 1e-12);
        let r = classify_regime(&ProblemParams::new(1.0, 1.5, NonlinearityKind::SignedPower).unwrap());
        assert_eq!(r.value, Regime::Balanced);
        assert_eq!(r.predicted_residual_exponent, 3.0);
        let r = classify_regime(&ProblemParams::new(1.5, 3.0, NonlinearityKind::IntegerPower).unwrap());
        assert_eq!(r.value, Regime::DispersionDominated);
        assert_eq!(r.predicted_residual_exponent, 4.0);
        let near = ProblemParams::new(1.0, 1.5 + 1e-9, NonlinearityKind::SignedPower).unwrap();
        assert_eq!(classify_regime(&near).value, Regime::DispersionDominated);
    }

    #[test]
    fn lorentzian_coefficients() {
        let params = ProblemParams::new(1.0, 2.0, NonlinearityKind::IntegerPower).unwrap();
        let grid = Grid::new(2000.0, 1 << 17).unwrap();
        let q = Profile::from_fn(grid, |x| 2.0 / (1.0 + x * x)).unwrap();
        let c = tail_coefficients_with(&q, &params, 1.0).unwrap();
        // ∫ 4/(1+x²)² = 2π
        assert!((c.integral_fq - 2.0 * PI).abs() < 1e-9, "{}", c.integral_fq);
        assert!((c.a1 - 2.0).abs() < 1e-9);
        assert_eq!(c.a2, 0.0);
        assert!(c.a3.is_some());
        assert!((c.a1_tilde - c.a1.powf(2.0)).abs() < 1e-12);
    }

    #[test]
    fn off_center_profile_rejected() {
        let params = ProblemParams::new(1.0, 2.0, NonlinearityKind::IntegerPower).unwrap();
        let grid = Grid::new(50.0, 1 << 10).unwrap();
        let q = Profile::from_fn(grid, |x| 2.0 / (1.0 + (x - 1.0).powi(2))).unwrap();
        assert!(matches!(tail_coefficients_with(&q, &params, 1.0), Err(Error::Precondition(_))));
    }
}
