use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    /// A numeric operation was asked for a value outside its domain.
    #[error("domain error in {operation}: {detail}")]
    Domain { operation: &'static str, detail: String },

    #[error("precondition violated in {operation}: {detail}")]
    Precondition { operation: &'static str, detail: String },

    /// Random-point testing could not find enough points where the input is defined.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("{path}:{line}: {detail}")]
    FileFormat { path: String, line: usize, detail: String },

    #[error("grid: {0}")]
    Grid(String),

    /// An iteration produced a non-finite value.
    #[error("diverged: {0}")]
    Diverged(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn precondition(operation: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition { operation, detail: detail.into() }
    }

    /// True for errors caused by evaluating outside a function's domain
    /// (as opposed to malformed input or usage).
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Eval(EvalError::Domain { .. }) | Error::Domain { .. } | Error::Inconclusive(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
