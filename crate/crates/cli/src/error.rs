use std::process::ExitCode;

use cknlab_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Precondition(String),

    #[error("{0}")]
    NonConvergence(String),

    #[error("{0}")]
    Consistency(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialize(String),

    #[error("{failed} acceptance criteria failed")]
    Acceptance { failed: usize },
}

impl CliError {
    pub fn precondition(msg: String) -> Self {
        CliError::Precondition(msg)
    }

    /// 2 precondition, 3 non-convergence, 4 consistency, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Precondition(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Consistency(_) => 4,
            CliError::Io(_) | CliError::Serialize(_) | CliError::Acceptance { .. } => 1,
        }
    }

    pub fn to_exit(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::NonConvergence { .. }
            | CoreError::NonFiniteSample { .. }
            | CoreError::Overflow(_) => CliError::NonConvergence(msg),
            CoreError::Consistency(_) => CliError::Consistency(msg),
            _ => CliError::Precondition(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
