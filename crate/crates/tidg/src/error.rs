use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

/// Errors surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("material violates pointwise stability at p = {p}")]
    Stability { p: f64 },
    #[error(transparent)]
    Numerical(#[from] tidg_core::Error),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot encode output: {0}")]
    Encode(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit status: 2 for configuration errors, 3 for unstable
    /// materials, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stability { .. } | CliError::Numerical(tidg_core::Error::StabilityViolation) => 3,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Stability { .. } | CliError::Numerical(tidg_core::Error::StabilityViolation) => "StabilityViolation",
            CliError::Numerical(_) => "NumericalError",
            CliError::Io { .. } => "IoError",
            CliError::Encode(_) => "EncodeError",
        }
    }

    /// One-line JSON description for machine consumers.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        let report = Report { error: self.kind(), message: self.to_string(), exit_code: self.exit_code() };
        serde_json::to_string(&report).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}
