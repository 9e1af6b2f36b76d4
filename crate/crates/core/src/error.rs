use alloc::string::String;

/// Errors raised by the kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("singular point {0}: the map has no image here")]
    SingularPoint(f64),
    #[error("return cap of {cap} steps exceeded")]
    CapExceeded { cap: u64 },
    #[error("orbit left the built stages of the tower")]
    Truncation,
    #[error("tower height overflows at stage {stage}")]
    Overflow { stage: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cell of zero mass")]
    ZeroMass,
    #[error("empty sample")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("too few usable points for a fit: {0}")]
    TooFewPoints(usize),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
