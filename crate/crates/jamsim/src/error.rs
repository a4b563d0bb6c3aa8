//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or parameter set violates a documented invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The energy split leaves no usable data phase (`p_d = 0` or `eta = T`).
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    /// Channel estimation was requested without any training energy.
    #[error("no training energy: {0}")]
    NoTraining(String),

    /// The large-antenna limit does not exist for this split.
    #[error("unbounded limit: {0}")]
    UnboundedLimit(String),

    /// The symmetric-fading closed form was called with unequal user gains.
    #[error("non-symmetric fading: {0}")]
    NonSymmetricFading(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}
