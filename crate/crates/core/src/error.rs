use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("ridge system is rank deficient (lambda = 0); use a positive penalty")]
    RankDeficient,

    #[error("reservoir draw degenerate after {attempts} resamples (sparsity {sparsity})")]
    DegenerateReservoir { attempts: u32, sparsity: f64 },

    #[error("missing observation for group {group}, period {period}, sub-period {sub}")]
    MissingObservation {
        group: usize,
        period: usize,
        sub: usize,
    },

    #[error("model has not been fitted")]
    Unfitted,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("data error in series `{code}`: {reason}")]
    Series { code: String, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("weights are not on the simplex: {0}")]
    Simplex(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by input data rather than configuration or numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::MissingObservation { .. }
                | Error::Series { .. }
                | Error::Parse { .. }
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::InsufficientData(_)
        )
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
