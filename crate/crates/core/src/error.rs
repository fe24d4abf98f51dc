use thiserror::Error;

/// Errors raised by the belief-space library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
    #[error("symmetric eigendecomposition did not converge")]
    EigenFailed,
    #[error("travel distance must be nonnegative, got {0}")]
    NegativeDistance(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty chain or tree")]
    Empty,
    #[error("chain lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("rejection sampling budget of {0} attempts exhausted")]
    RejectionBudgetExhausted(usize),
    #[error("transition is not lossless: posterior exceeds prior")]
    NotLossless,
    #[error("no node reaches the goal region")]
    GoalNotReached,
    #[error("scaled belief collides with an obstacle")]
    ScaledCollision,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
