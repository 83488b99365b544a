use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] colony::Error),
}

impl BenchError {
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const NUMERICAL: i32 = 4;

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this failure class.
    pub fn exit_code(&self) -> i32 {
        use colony::Error as E;
        match self {
            BenchError::Usage(_) => Self::USAGE,
            BenchError::Io { .. } | BenchError::Parse { .. } => Self::IO,
            BenchError::Core(e) => match e {
                E::Io(_) | E::Json(_) | E::Dataset(_) | E::Checkpoint(_) => Self::IO,
                E::NonFinite { .. } | E::NonFiniteGrad { .. } | E::Diverged { .. } | E::Layer { .. } => {
                    Self::NUMERICAL
                }
                E::InvalidArgument(_) | E::Unsupported { .. } => Self::USAGE,
                _ => 1,
            },
        }
    }
}
