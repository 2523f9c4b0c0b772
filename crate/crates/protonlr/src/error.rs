use std::path::PathBuf;

use protonlr_core::error::ErrorCategory;

/// Errors of the front end: core failures plus configuration parsing and file IO.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] protonlr_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type AppResult<T> = Result<T, AppError>;

/// Exit codes of the command-line interface.
pub mod exit_code {
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const PHYSICS: i32 = 4;
    pub const NUMERICAL: i32 = 5;
    pub const IO: i32 = 6;
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        AppError::Format { path: path.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Core(e) => match e.category() {
                ErrorCategory::Config => exit_code::CONFIG,
                ErrorCategory::Physics => exit_code::PHYSICS,
                ErrorCategory::Numerical => exit_code::NUMERICAL,
            },
            AppError::Config(_) => exit_code::CONFIG,
            // Malformed data tables are physics-data failures; other malformed files are IO.
            AppError::Format { .. } | AppError::Io { .. } => exit_code::IO,
        }
    }
}
