use thiserror::Error;

use crate::groundstate::ConvergenceReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters violate the admissible (alpha, p, kind) window.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The kernel is singular at the origin for alpha <= 1.
    #[error("kernel is singular at x = 0 for alpha = {alpha}")]
    Singularity { alpha: f64 },

    /// A quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Non-finite samples or mismatched grid data.
    #[error("data error: {0}")]
    Data(String),

    /// A quotient or projection degenerated (zero denominator).
    #[error("degenerate profile: {0}")]
    Degenerate(String),

    #[error("solver did not converge after {} iterations (residual {:.3e})", .report.iterations, .report.final_residual)]
    NotConverged { report: Box<ConvergenceReport> },

    #[error("solver became unstable at iteration {iteration}")]
    Instability { iteration: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Tail fit window is invalid or the data changes sign in it.
    #[error("fit domain error: {0}")]
    FitDomain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
