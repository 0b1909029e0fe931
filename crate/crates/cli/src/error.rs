use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{scenario} rung {rung}, replication {replication}: {source}")]
    Run {
        scenario: &'static str,
        rung: u64,
        replication: usize,
        source: rwre_core::Error,
    },

    #[error(transparent)]
    Core(#[from] rwre_core::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
