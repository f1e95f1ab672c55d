use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension overflow in {0}")]
    DimensionOverflow(&'static str),
    #[error("state limit exceeded: {states} states requested, limit is {limit}")]
    StateLimit { states: usize, limit: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("empty vector or matrix")]
    Empty,
    #[error("non-finite entry: {0}")]
    NonFinite(String),
    #[error("malformed distribution: {0}")]
    MalformedDistribution(String),
    #[error("matrix is not unitary within {tol:e} (deviation {deviation:e})")]
    NotUnitary { tol: f64, deviation: f64 },
    #[error("no stabilizing power found up to {cap}")]
    SearchExhausted { cap: u64 },
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(char),
    #[error("malformed automaton: {0}")]
    Malformed(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("evaluation is not real: imaginary part {0:e}")]
    NonReal(f64),
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
