use std::path::PathBuf;

use boostkit::BoostError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: BoostError },

    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Boost(#[from] BoostError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for usage errors, 3 for bad input files, 4 when an algorithm's
    /// preconditions do not hold.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input { .. } | CliError::File { .. } => 3,
            CliError::Boost(e) => match e {
                BoostError::InvalidParameter(_) => 2,
                BoostError::Parse { .. }
                | BoostError::BoostBelowBase { .. }
                | BoostError::ProbabilityRange { .. }
                | BoostError::DuplicateEdge { .. }
                | BoostError::SelfLoop(_)
                | BoostError::NodeOutOfRange { .. }
                | BoostError::NotATree(_)
                | BoostError::Io(_) => 3,
                _ => 4,
            },
            CliError::Json(_) | CliError::Csv(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
