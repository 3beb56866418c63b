use std::path::PathBuf;

use matchmarket::MarketError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error(transparent)]
    Market(#[from] MarketError),

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output failed: {0}")]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn invalid(field: impl Into<String>, message: impl std::fmt::Display) -> Self {
        CliError::Invalid {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
