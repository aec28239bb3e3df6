//! Error type shared across the solver.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A pivot fell below the singularity threshold, or the matrix is
    /// structurally rank-deficient.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// The Picard iteration did not reach its tolerance within the
    /// configured iteration budget.
    #[error("nonlinear solve failed at t={time}: update {update:.3e} after {iters} iterations")]
    NonConvergence {
        time: f64,
        update: f64,
        iters: usize,
    },

    /// Non-finite values appeared in the solution.
    #[error("solution diverged at t={time}")]
    Diverged { time: f64 },

    #[error("missing exact solution: {0}")]
    MissingExactSolution(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
