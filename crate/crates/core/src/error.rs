use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("encode: {0}")]
    Encode(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("driver has no feasible candidate")]
    NoFeasibleCandidate,

    #[error("candidate sets differ: {0} vs {1} entries")]
    CandidateMismatch(usize, usize),

    #[error("assignment violates constraints: {0}")]
    InvalidAssignment(String),

    #[error("brute-force oracle limited to 8x8, got {rows}x{cols}")]
    OracleTooLarge { rows: usize, cols: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
