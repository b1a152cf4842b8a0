use crate::poly::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("{0}: zero input")]
    ZeroInput(&'static str),
    #[error("total degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integration failed: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
