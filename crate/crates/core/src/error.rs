use thiserror::Error;

/// Errors raised by the algebraic core and the decomposition engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid modulus {0}: {1}")]
    InvalidModulus(u64, &'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(u64, u64),
    #[error("matrix is not invertible over Z_{0}")]
    NotInvertible(u64),
    #[error("matrix is not symplectic over Z_{0}")]
    NotSymplectic(u64),
    #[error("invalid phase: {0}")]
    InvalidPhase(String),
    #[error("operator does not commute with the stabilizer group: {0}")]
    NotInCommutant(String),
    #[error("operator exponents are not in the generator span")]
    NotInSpan,
    #[error("invalid stabilizer group: {0}")]
    InvalidGroup(String),
    #[error("unknown party '{0}'")]
    UnknownParty(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("synthesis failed: {0}")]
    Synthesis(String),
    #[error("residual phase after level reduction: {0}")]
    ResidualPhase(String),
    #[error("iteration bound {bound} exceeded")]
    IterationBound { bound: usize },
    #[error("oracle dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
