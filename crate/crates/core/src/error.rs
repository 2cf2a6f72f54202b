//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// Grid construction rejected (size, spacing, or power-of-two rule).
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A parameter state violates its family's admissibility constraints
    /// (L ≤ 0, A ≤ 0, non-decaying exponent, non-finite entries, ...).
    #[error("inadmissible parameter state: {0}")]
    InadmissibleState(String),

    /// A caller passed arguments outside an operation's contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Re[M] is not symmetric positive definite; carries the condition
    /// estimate computed during assembly.
    #[error("singular metric tensor (Re[M] not SPD, condition estimate {condition:.3e})")]
    SingularMetric { condition: f64 },

    /// The constraint matrix C is singular; names the conserved quantity
    /// whose gradient is (nearly) dependent on the others.
    #[error("dependent conservation constraints: gradient of {quantity:?} is not independent")]
    DependentConstraints { quantity: String },

    /// Parsing a serialized record failed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
