use std::path::PathBuf;

use faces_core::FacesError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] FacesError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("missing artifact {0}; run the preceding command first")]
    MissingArtifact(PathBuf),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit code for identifiability failures.
pub const EXIT_IDENTIFIABILITY: u8 = 2;
/// Process exit code for rank lost to the eigenvalue cutoff.
pub const EXIT_CUTOFF_RANK: u8 = 3;
/// Process exit code for a violated error bound in ground-truth mode.
pub const EXIT_BOUND_VIOLATION: u8 = 4;

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Core(FacesError::NotIdentifiable { .. }) => EXIT_IDENTIFIABILITY,
            Error::Core(FacesError::CutoffRankLoss { .. }) => EXIT_CUTOFF_RANK,
            _ => 1,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
