//! Commands of the `fractail` binary.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 solver
//! non-convergence, 4 verification failure.

pub mod args;
pub mod commands;
pub mod config;

use fractail_core::Error;

pub use args::{Cli, Command, Format};
pub use commands::run;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

/// Error carrying the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

/// Exit code of a core error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NotConverged { .. } | Error::Instability { .. } => EXIT_NOT_CONVERGED,
        Error::Precondition(_) | Error::FitDomain(_) | Error::Degenerate(_) | Error::Accuracy { .. } => {
            EXIT_VERIFICATION
        }
        _ => EXIT_USAGE,
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Self { code: exit_code(&err), message: err.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Self::usage(format!("output: {err}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(err: csv::Error) -> Self {
        Self::usage(format!("csv: {err}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(err: serde_json::Error) -> Self {
        Self::usage(format!("json: {err}"))
    }
}
