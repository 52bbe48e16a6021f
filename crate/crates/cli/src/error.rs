use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] mfesn_core::Error),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 config, 3 data, 4 validation, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use mfesn_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) => 4,
            CliError::Io { .. } => 1,
            CliError::Core(e) if e.is_data_error() => 3,
            CliError::Core(E::InvalidParameter { .. } | E::Json(_) | E::DimensionMismatch { .. }) => 2,
            CliError::Core(E::Simplex(_)) => 4,
            CliError::Core(_) => 1,
        }
    }
}
