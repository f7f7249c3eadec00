use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected ambient dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dense limit exceeded: operation needs 2^{requested} entries, limit is 2^{limit}")]
    DenseLimit { requested: usize, limit: u32 },

    #[error("value {value} at index {index} is outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },

    #[error("operation is undefined on the zero subspace")]
    ZeroSubspace,

    #[error("refusing to enumerate every subspace of F2^{0} (limit is n <= 4)")]
    EnumerationTooLarge(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("claim violated: {0}")]
    ClaimViolation(String),

    #[error("no valid family after {0} attempts")]
    RetryCapExceeded(u32),

    #[error("value too large to materialize: {0}")]
    Overflow(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("subspace is already regular; nothing to refine")]
    AlreadyRegular,
}

pub type Result<T> = std::result::Result<T, Error>;
