//! Resolvent kernel of the fractional Helmholtz operator `1 + |D|^α`,
//! ground states of `|D|^α Q + Q = f(Q)` and verification of their
//! algebraic tail expansions.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod groundstate;
pub mod params;
pub mod quadrature;
pub mod specfun;
pub mod spectral;
pub mod special;

pub use error::{Error, Result};
pub use groundstate::{solve_ground_state, ConvergenceReport, InitialGuess, SolverOptions};
pub use params::{critical_exponent, NonlinearityKind, ProblemParams};
pub use specfun::{EvalOptions, KernelSeries};
pub use spectral::{Grid, Profile, ProfileEnvelope};
