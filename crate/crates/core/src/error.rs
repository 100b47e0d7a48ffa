use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("p = {p} lies outside the rotor-limit band |p| <= j_r = {j_r}")]
    OutOfBand { p: f64, j_r: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("non-finite tangent growth factor at step {step}")]
    Numeric { step: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("checkpoint spec hash {found} does not match {expected}; refusing to resume")]
    SpecHashMismatch { expected: String, found: String },

    #[error("corrupted checkpoint record for cell {cell}: {reason}")]
    CorruptRecord { cell: String, reason: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
