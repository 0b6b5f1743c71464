//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by construction, evaluation, fitting, and measurement.
#[derive(Debug, Error)]
pub enum Error {
    /// A value fell outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A dimension did not line up with what the operation expects.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Structurally invalid input (unsorted cuts, empty nets, bad labels, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested error budget cannot be met within resource caps.
    /// `achieved` is the best total the builder could still certify or measure.
    #[error("error budget infeasible: requested {requested:e}, best achievable {achieved:e}")]
    BudgetInfeasible { requested: f64, achieved: f64 },

    /// Numerical integration stopped before reaching the requested tolerance.
    #[error("quadrature did not converge: requested tolerance {requested:e}, achieved {achieved:e}")]
    Quadrature { requested: f64, achieved: f64 },

    /// A linear solve failed (singular or badly conditioned system).
    #[error("linear solve failed: {0}")]
    Solver(String),
}
