use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource guard exceeded: {0}")]
    ResourceGuard(String),
    #[error("requested precision {requested} bits exceeds cap {cap}")]
    PrecisionCap { requested: u32, cap: u32 },
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("oracle disagreement: {0}")]
    OracleDisagreement(String),
    #[error("not an S-unit: {0}")]
    NotSUnit(String),
    #[error("level out of range: {0}")]
    LevelOutOfRange(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
