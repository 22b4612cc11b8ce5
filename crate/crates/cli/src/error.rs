use std::path::PathBuf;
use std::process::ExitCode;

use gfc_core::GfcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] GfcError),
    /// A check ran to completion and did not meet its tolerance.
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// 2 for anything the caller can fix by changing inputs or flags, 1 otherwise.
    pub fn exit_code(&self) -> ExitCode {
        let code = match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Format { .. } => 2,
            CliError::Core(e) => match e {
                GfcError::InvalidDimensions { .. }
                | GfcError::DimensionTooSmall { .. }
                | GfcError::ShapeMismatch { .. }
                | GfcError::InvalidParameter { .. }
                | GfcError::Coverage { .. }
                | GfcError::SizeGuard { .. } => 2,
                _ => 1,
            },
            CliError::CheckFailed(_) => 1,
        };
        ExitCode::from(code)
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
