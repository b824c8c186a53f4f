//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("qubits {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("qubit {qubit} used twice in cycle {cycle}")]
    DuplicateQubit { cycle: usize, qubit: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("memory budget exceeded at step `{step}`: needs {needed} bytes, budget {budget}")]
    Budget {
        step: String,
        needed: usize,
        budget: usize,
    },
    #[error("{0} qubits exceeds the state-vector cap of {1}")]
    TooManyQubits(usize, usize),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
