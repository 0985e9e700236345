//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, training, evaluation, and I/O.
#[derive(Debug, Error)]
pub enum BennError {
    /// Dimensions of an input do not match what the operation requires.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A scalar parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// A (mode, architecture, ensemble) combination violates a structural
    /// invariant; the message names the violated invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An operation that only applies to certain belt modes was called on
    /// a model with a different mode.
    #[error("mode error: {0}")]
    Mode(String),

    /// The response sample is degenerate (e.g. constant) and a data-driven
    /// quantity such as a bandwidth cannot be formed from it.
    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    /// A matrix argument does not have full column rank.
    #[error("rank-deficient input: {0}")]
    RankDeficient(String),

    /// A kernel bandwidth could not be determined from the data.
    #[error("bandwidth selection failed: {0}")]
    Bandwidth(String),

    /// A linear-algebra routine failed; the message carries a condition
    /// estimate where one is available.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A text input could not be parsed. Row and column are 1-based;
    /// row 0 means the failure is not tied to a data row.
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, BennError>;
