//! All applicable checks on one profile, and flat rows for sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::spectral::Profile;

use super::fit::Window;
use super::verify::{
    max_derivative_order, verify_cubic_third_order, verify_derivative_order, verify_first_order, verify_second_order,
    Status, TailReport,
};
use super::{classify_regime, RegimeClass, TailCoefficients};

/// Highest derivative order checked by [`verify_all`].
pub const MAX_DERIVATIVE: u32 = 3;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Overrides the default window of every check.
    pub window: Option<Window>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub params: ProblemParams,
    pub coefficients: TailCoefficients,
    pub regime: RegimeClass,
    pub reports: Vec<TailReport>,
}

impl VerificationReport {
    /// No check failed (inconclusive checks do not count).
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.status != Status::Fail)
    }

    pub fn get(&self, tag: &str) -> Option<&TailReport> {
        self.reports.iter().find(|r| r.theorem_tag == tag)
    }
}

/// Runs every check that applies to `params`: first order always, second
/// order for positive profiles, derivatives up to the regularity of `f`
/// and the cubic third order for `p = 3`, `1 < α < 2`.
pub fn verify_all(
    q: &Profile,
    params: &ProblemParams,
    coeffs: &TailCoefficients,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let w = opts.window;
    let mut reports = vec![verify_first_order(q, params, coeffs, w)?];
    if q.values.iter().all(|&v| v > 0.0) {
        reports.push(verify_second_order(q, params, coeffs, w)?);
    }
    let max_j = max_derivative_order(params).map_or(MAX_DERIVATIVE, |m| m.min(MAX_DERIVATIVE));
    for j in 1..=max_j {
        reports.push(verify_derivative_order(q, params, coeffs, j, w)?);
    }
    match verify_cubic_third_order(q, params, coeffs, w) {
        Ok((a, b)) => reports.extend([a, b]),
        Err(Error::Unsupported(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(VerificationReport { params: *params, coefficients: coeffs.clone(), regime: classify_regime(params), reports })
}

/// One line of a parameter sweep. Check columns hold `pass`, `fail`,
/// `inconclusive` or are empty when the check does not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub p: f64,
    pub kind: String,
    pub regime: String,
    /// `ok`, or the error that stopped the pair.
    pub outcome: String,
    pub iterations: Option<usize>,
    pub final_residual: Option<f64>,
    pub a1: Option<f64>,
    pub first_order: String,
    pub second_order: String,
    pub deriv_1: String,
    pub deriv_2: String,
    pub deriv_3: String,
    pub cubic_third_order: String,
    pub all_pass: bool,
}

impl SweepRow {
    pub fn from_report(report: &VerificationReport, iterations: usize, final_residual: f64) -> Self {
        let col = |tag: &str| report.get(tag).map(|r| r.status.to_string()).unwrap_or_default();
        let cubic = match (report.get("cubic_third_order"), report.get("cubic_third_order_derivative")) {
            (Some(a), Some(b)) => {
                if a.status == Status::Fail || b.status == Status::Fail {
                    Status::Fail.to_string()
                } else {
                    a.status.to_string()
                }
            }
            _ => String::new(),
        };
        let params = &report.params;
        Self {
            alpha: params.alpha,
            p: params.p,
            kind: params.kind.to_string(),
            regime: report.regime.value.to_string(),
            outcome: "ok".into(),
            iterations: Some(iterations),
            final_residual: Some(final_residual),
            a1: Some(report.coefficients.a1),
            first_order: col("first_order"),
            second_order: col("second_order"),
            deriv_1: col("deriv_1"),
            deriv_2: col("deriv_2"),
            deriv_3: col("deriv_3"),
            cubic_third_order: cubic,
            all_pass: report.all_pass(),
        }
    }

    /// Row for a pair that could not be solved or verified.
    pub fn from_error(params: &ProblemParams, err: &Error) -> Self {
        Self {
            alpha: params.alpha,
            p: params.p,
            kind: params.kind.to_string(),
            regime: classify_regime(params).value.to_string(),
            outcome: err.to_string(),
            iterations: None,
            final_residual: None,
            a1: None,
            first_order: String::new(),
            second_order: String::new(),
            deriv_1: String::new(),
            deriv_2: String::new(),
            deriv_3: String::new(),
            cubic_third_order: String::new(),
            all_pass: false,
        }
    }
}
