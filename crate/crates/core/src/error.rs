use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weight norm diverges for exponent {exponent}")]
    DivergentNorm { exponent: f64 },

    #[error("wavenumber stream exhausted after {emitted} emissions")]
    Exhausted { emitted: usize },

    #[error("box of side {box_cap} cannot certify the first {count} wavenumbers")]
    BoxTooSmall { box_cap: u32, count: usize },

    #[error("budget of {budget} exhausted before the scan terminated")]
    BudgetExhausted { budget: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("remainder certificate failed: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
