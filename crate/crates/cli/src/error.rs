use origami_grasp_core::GraspError;

use crate::scenario::ScenarioErrors;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(#[from] ScenarioErrors),
    #[error("{0}")]
    Model(#[from] GraspError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for every kind of bad input; infeasible plans are not errors.
    pub fn exit_code(&self) -> i32 {
        2
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
