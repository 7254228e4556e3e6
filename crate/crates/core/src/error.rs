use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the calibration library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (shape, range, emptiness).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The calibration window carries no usable information, e.g. every
    /// centered sensor column is zero.
    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("{path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::contract(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
