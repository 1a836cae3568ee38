use thiserror::Error;

use crate::exprlang::{EvalError, ParseError};
use crate::problem::ProblemError;
use crate::quadrature::QuadratureError;

/// An argument outside the mathematical domain of a function.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{function}: {message}")]
pub struct DomainError {
    pub function: &'static str,
    pub message: String,
}

impl DomainError {
    pub fn new(function: &'static str, message: impl Into<String>) -> Self {
        Self { function, message: message.into() }
    }
}

/// Crate-wide error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("negative iterate value {value:e} at t = {t} (iteration {iteration})")]
    NegativeIterate { iteration: usize, t: f64, value: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
