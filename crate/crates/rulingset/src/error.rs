use std::path::PathBuf;

use rulingset_core::localsim::PipelineError;
use rulingset_core::modelcheck::ModelCheckError;
use rulingset_core::protocol::ParamError;
use rulingset_core::scheduler::RunError;
use rulingset_core::GraphError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    ModelCheck(#[from] ModelCheckError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("trace mismatch at line {line}: {reason}")]
    Replay { line: usize, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Format(_) | CliError::Graph(_) | CliError::Params(_) => {
                EXIT_USAGE
            }
            CliError::ModelCheck(ModelCheckError::BudgetExceeded { .. }) => EXIT_BUDGET,
            CliError::Pipeline(PipelineError::NotConverged { .. } | PipelineError::Uncolored { .. }) => EXIT_BUDGET,
            _ => EXIT_INVALID,
        }
    }
}

pub fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
