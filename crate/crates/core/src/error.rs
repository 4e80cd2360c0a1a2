use grouprep_lp::LpError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    /// Bad caller input: shapes, ranges, missing parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An exhaustive oracle refused an instance above its size guard.
    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),
    /// No feasible answer exists for the given data.
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    /// A property that the algorithm guarantees did not hold.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CoreError {
    /// True for errors caused by the caller's input rather than by a solver
    /// or algorithm failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, CoreError::InvalidInput(_) | CoreError::TooLarge(_) | CoreError::Infeasible(_))
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CoreError {
    CoreError::InvalidInput(msg.into())
}
