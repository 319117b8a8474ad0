use std::path::PathBuf;

use ddkit::model::ModelError;
use ddkit::operators::OperatorError;
use ddkit::pulseshape::PulseError;
use ddkit::sequences::SequenceError;
use ddkit::simulate::SimError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_UNFITTABLE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Unfittable(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Unfittable(_) => EXIT_UNFITTABLE,
            _ => EXIT_PRECONDITION,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

macro_rules! precondition_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Precondition(e.to_string())
            }
        })*
    };
}

precondition_from!(ModelError, OperatorError, SequenceError, SimError, PulseError);
