use std::path::PathBuf;
use thiserror::Error;

/// Failure of a command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or unusable paths; detected before any work starts.
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    /// The request is well formed but has no valid answer.
    #[error("{0}")]
    Domain(String),
    /// A numerical search failed to converge.
    #[error("{0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Write { .. } => 2,
            CliError::Domain(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }

    pub fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}
