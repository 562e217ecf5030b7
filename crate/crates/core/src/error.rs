use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LotError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no causal coupling exists between the measures")]
    NoCausalCoupling,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("cannot parse {field}: {message}")]
    Parse { field: String, message: String },
}

impl LotError {
    pub fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        LotError::Parse { field: field.into(), message: message.into() }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        LotError::Domain(message.into())
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        LotError::Precondition(message.into())
    }
}

pub type Result<T> = std::result::Result<T, LotError>;
