//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("site {site} outside window [{lo}, {hi}]")]
    OutOfRange { site: i64, lo: i64, hi: i64 },

    #[error("walk left the window [{lo}, {hi}] after {steps} steps")]
    WindowExit { lo: i64, hi: i64, steps: u64 },

    #[error("sampling failed after {attempts} attempts: {reason}")]
    SamplingFailure { attempts: u64, reason: String },

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("network is disconnected: {0}")]
    Disconnected(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
