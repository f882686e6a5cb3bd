use thiserror::Error;

/// Errors produced by data construction, linear solvers, the optimizer, and
/// the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Mismatched vector/matrix dimensions or group structure.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Non-finite values or otherwise unusable input data.
    #[error("invalid data: {0}")]
    Data(String),

    /// Invalid configuration values (tolerances, grids, settings).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An iterative linear solve ran out of its iteration budget.
    #[error(
        "linear solver stalled: relative residual {achieved:.3e} after {iterations} iterations (tolerance {tolerance:.1e})"
    )]
    SolverStalled {
        /// Relative residual reached when the budget was exhausted.
        achieved: f64,
        /// Requested relative-residual tolerance.
        tolerance: f64,
        /// Iterations spent.
        iterations: usize,
    },

    /// A direct factorization hit a non-positive pivot.
    #[error("singular system: {0}")]
    Singular(String),

    /// An enumeration guard was exceeded.
    #[error("enumeration too large: {0}")]
    TooLarge(String),

    /// An argument fell outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The optimizer encountered a non-finite gradient.
    #[error("optimizer failed at iteration {iteration}: {message}")]
    Optimizer {
        /// Iteration at which the failure was detected (1-based).
        iteration: usize,
        /// Human-readable cause.
        message: String,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
