use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid value for {field}: {message}")]
    Field { field: &'static str, message: String },
    #[error("missing required field: {0}")]
    Missing(&'static str),
    #[error("regime error: clt needs H > 1/2 and alpha (1 - H) < 1/2, got alpha = {alpha}, hurst = {hurst} (alpha (1 - H) = {:.4})", alpha * (1.0 - hurst))]
    Regime { alpha: f64, hurst: f64 },
    #[error("config file {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Compute(#[from] harmstable::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    /// 2 for configuration problems, 1 for failures during the run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Field { .. } | CliError::Missing(_) | CliError::Regime { .. } | CliError::ConfigFile { .. } => 2,
            CliError::Compute(harmstable::Error::Config(_)) | CliError::Compute(harmstable::Error::Parameter { .. }) => 2,
            _ => 1,
        }
    }
}
