//! Shared error type for all numerical operations.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs is violated (non-finite values, bad
    /// ordering, too few samples, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The state became non-finite during time integration.
    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },

    /// An iterative solve ran out of iterations. Carries the last two
    /// shooting parameters and the remaining endpoint mismatch, which
    /// usually signals a non-unique or ill-posed boundary-value problem.
    #[error("no convergence after {iterations} iterations (last bracket [{bracket:?}], mismatch {mismatch:.3e})")]
    Nonconvergence {
        iterations: usize,
        bracket: (f64, f64),
        mismatch: f64,
    },

    /// A Gaussian kernel degenerated (vanishing quadratic coefficient);
    /// the composition or normalization integral is undefined.
    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    /// The grid cannot resolve the requested feature.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// The grid undersamples an oscillatory kernel phase.
    #[error("kernel phase aliasing: spacing {actual:.3e} exceeds required {required:.3e}")]
    Aliasing { required: f64, actual: f64 },

    /// An oscillatory quadrature could not meet its accuracy budget.
    #[error("quadrature failed to converge for dt = {delta_t:.3e}: {detail}")]
    QuadratureFailure { delta_t: f64, detail: String },

    /// Malformed serialized data (CSV tables).
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
