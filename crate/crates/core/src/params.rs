//! Problem parameters for `|D|^alpha Q + Q - f(Q) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which power nonlinearity `f` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    /// `f(u) = |u|^(p-1) u`
    SignedPower,
    /// `f(u) = u^p` with integral `p >= 2`
    IntegerPower,
}

impl std::str::FromStr for NonlinearityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed_power" | "signed" => Ok(Self::SignedPower),
            "integer_power" | "integer" => Ok(Self::IntegerPower),
            other => Err(Error::InvalidParams(format!("unknown nonlinearity kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for NonlinearityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::SignedPower => "signed_power",
            Self::IntegerPower => "integer_power",
        })
    }
}

/// Dispersion order, nonlinearity exponent and nonlinearity kind.
///
/// Constructed through [`ProblemParams::new`], which enforces the
/// subcritical window `0 < alpha < 2`, `1 < p < p*(alpha)`. The local
/// limit `alpha = 2` is reachable only through
/// [`ProblemParams::validation_boundary`] and is used as an oracle
/// (the classical sech² soliton).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub alpha: f64,
    pub p: f64,
    pub kind: NonlinearityKind,
}

impl ProblemParams {
    pub fn new(alpha: f64, p: f64, kind: NonlinearityKind) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 2)")));
        }
        let params = Self { alpha, p, kind };
        params.check_exponent()?;
        Ok(params)
    }

    /// Parameters at the local endpoint `alpha = 2`, for validation only.
    pub fn validation_boundary(p: f64, kind: NonlinearityKind) -> Result<Self> {
        let params = Self { alpha: 2.0, p, kind };
        params.check_exponent()?;
        Ok(params)
    }

    fn check_exponent(&self) -> Result<()> {
        let p = self.p;
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParams(format!("p = {p} must be finite and > 1")));
        }
        let p_star = if self.alpha >= 2.0 { f64::INFINITY } else { critical_exponent(self.alpha)? };
        if p >= p_star {
            return Err(Error::InvalidParams(format!(
                "p = {p} is not subcritical: p*({}) = {p_star}",
                self.alpha
            )));
        }
        if self.kind == NonlinearityKind::IntegerPower && (p.fract() != 0.0 || p < 2.0) {
            return Err(Error::InvalidParams(format!(
                "integer_power requires an integral p >= 2, got {p}"
            )));
        }
        Ok(())
    }

    /// Re-validates a deserialized value.
    pub fn validate(&self) -> Result<()> {
        if self.alpha == 2.0 {
            Self::validation_boundary(self.p, self.kind).map(|_| ())
        } else {
            Self::new(self.alpha, self.p, self.kind).map(|_| ())
        }
    }

    /// Pointwise nonlinearity.
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match self.kind {
            NonlinearityKind::SignedPower => u.signum() * u.abs().powf(self.p),
            NonlinearityKind::IntegerPower => u.powi(self.p as i32),
        }
    }

    /// Default Petviashvili stabilizing exponent `p / (p - 1)`.
    pub fn default_gamma(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// `p*(alpha) = 2 alpha / (1 - alpha) + 1` for `alpha < 1`, `+inf` for `alpha >= 1`.
pub fn critical_exponent(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 2)")));
    }
    if alpha >= 1.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(2.0 * alpha / (1.0 - alpha) + 1.0)
    }
}
