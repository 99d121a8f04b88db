use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument falls outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow while computing {0}")]
    Overflow(String),

    /// Two sequences in the same permutation orbit carry different probabilities.
    #[error(
        "not exchangeable: P({first:?}) = {first_prob} but P({second:?}) = {second_prob} (tolerance {tolerance:e})"
    )]
    ExchangeabilityViolation {
        first: Vec<usize>,
        first_prob: f64,
        second: Vec<usize>,
        second_prob: f64,
        tolerance: f64,
    },

    #[error("probabilities sum to {mass}, expected 1 (tolerance {tolerance:e})")]
    Normalization { mass: f64, tolerance: f64 },

    /// A dense test-scale construction was asked for more than it supports.
    #[error("capacity exceeded: {what} needs {requested}, limit is {limit}; use the occupation-basis path")]
    Capacity { what: &'static str, requested: usize, limit: usize },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>) -> Self {
        Error::SolverFailure(msg.into())
    }
}
