use std::path::PathBuf;

use thiserror::Error;

/// Process exit code for malformed input or configuration.
pub const EXIT_VALIDATION: i32 = 2;
/// Process exit code for a computation that failed on valid input.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] phenocluster::Error),

    #[error("{0}")]
    Config(String),

    #[error(
        "no knee found in the distortion curve over k = {0}..={1}; pass --k to choose k manually"
    )]
    NoKnee(usize, usize),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => EXIT_NUMERICAL,
            CliError::NoKnee(..) => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
