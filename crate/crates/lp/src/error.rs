use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("value vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("numerical breakdown after {iterations} iterations: {detail}")]
    NumericalBreakdown { iterations: usize, detail: String },
}
