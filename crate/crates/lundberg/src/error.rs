use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] lundberg_core::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
        }
    }

    /// 2 for bad input of any kind, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => 3,
            _ => 2,
        }
    }

    /// Single-line `key=value` diagnostic.
    pub fn diagnostic(&self) -> String {
        let detail = self.to_string().replace(['\n', '\r'], " ");
        format!("error kind={} exit={} detail={}", self.kind(), self.exit_code(), detail.trim())
    }
}
