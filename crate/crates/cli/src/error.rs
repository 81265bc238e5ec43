use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("cannot emit scenario: {0}")]
    Emit(#[from] toml::ser::Error),

    #[error(transparent)]
    Model(#[from] geoswarm::Error),

    #[error("step table: {0}")]
    Csv(#[from] csv::Error),

    #[error("summary: {0}")]
    Json(#[from] serde_json::Error),

    /// A run stopped at a singular attitude error; the partial log was written.
    #[error("run aborted at step {step} (t = {t}): {source}")]
    Aborted {
        step: usize,
        t: f64,
        #[source]
        source: geoswarm::Error,
    },

    #[error("validation failed: {0}")]
    ValidationFailed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 validation failure, 2 bad input or violated
    /// hypothesis, 3 singularity abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed(_) => 1,
            CliError::Aborted { .. } => 3,
            CliError::Model(geoswarm::Error::NearPiSingularity { .. }) => 3,
            _ => 2,
        }
    }
}
