use std::io;
use std::path::PathBuf;

use rover_health::scenario::ScenarioError;
use rover_health::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{origin}:{line}:{column}: syntax error: {message}")]
    Syntax {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: at `{key}`: {message}")]
    Schema {
        origin: String,
        key: String,
        message: String,
    },
    #[error("invalid override `{raw}`: {reason}")]
    Override { raw: String, reason: String },
    #[error("unknown builtin scenario `{0}` (see `list`)")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Invalid(#[from] SimError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
