use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },
    #[error("tail mass must be finite and non-negative, got {0}")]
    BadTail(f64),
    #[error("sobolev norm undefined for a sequence with an unstored tail")]
    SobolevUndefinedForTail,
    #[error("invalid index range [{a}, {b}]")]
    InvalidRange { a: f64, b: f64 },
    #[error("index {index} lies in the unstored tail (stored length {len})")]
    RangeIntoTail { index: usize, len: usize },
    #[error("sequences with different tails cannot be compared")]
    IncomparableTails,
    #[error("truth exceeds observation window: coefficient {index} is non-zero, window is {window}")]
    TruthExceedsWindow { index: usize, window: usize },
    #[error("support too small to check: length {len}, need at least 2^{j0}")]
    SupportTooSmall { len: usize, j0: u32 },
    #[error("level {level} needs 2^{level} coefficients, observation holds {len}")]
    WindowOverflow { level: u32, len: usize },
    #[error("undersmoothing undefined for jhat = {jhat}, log2 n = {log2n}")]
    UndersmoothingUndefined { jhat: u32, log2n: f64 },
    #[error("empty resolution grid for n = {n}, s' = {s_prime}")]
    EmptyGrid { n: u64, s_prime: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ordering violated: {0}")]
    Ordering(String),
    #[error("numerical overflow: {0}")]
    Overflow(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
