use std::path::PathBuf;

use mtrepair::evolve::RepairError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("cannot read {}", .0.display())]
    MissingInput(PathBuf),
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("execution failed on test `{test}`: {message}")]
    Execution { test: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    MetamodelMismatch(String),
    #[error("mutation failed: {0}")]
    Mutation(String),
    #[error("cannot write {}: {message}", path.display())]
    Output { path: PathBuf, message: String },
    #[error("search cannot start: {0}")]
    Search(String),
}

impl From<RepairError> for CliError {
    fn from(e: RepairError) -> Self {
        match e {
            RepairError::Config(c) => CliError::Config(c.to_string()),
            RepairError::Exhausted(x) => CliError::Search(x.to_string()),
        }
    }
}

impl CliError {
    /// Process exit status; 1 is reserved for negative outcomes.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Manifest { .. } => 2,
            CliError::MissingInput(_) => 3,
            CliError::Parse { .. } => 4,
            CliError::Execution { .. } => 5,
            CliError::Config(_) => 6,
            CliError::MetamodelMismatch(_) => 7,
            CliError::Mutation(_) => 8,
            CliError::Output { .. } => 9,
            CliError::Search(_) => 10,
        }
    }
}

/// The command ran; `Negative` covers differences found and non-optimal repairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Positive,
    Negative,
}
