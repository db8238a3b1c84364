use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient ring mismatch (Poly vs Fourier)")]
    RingMismatch,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("incompatible operands: {0}")]
    Incompatible(String),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("geometry invariant violated: {0}")]
    Geometry(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("truncation insufficient: {0}")]
    Truncation(String),
    #[error("post-condition failed: {0}")]
    PostCondition(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
