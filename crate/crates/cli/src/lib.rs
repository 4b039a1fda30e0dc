//! Library behind the `sctl` binary: scenario files, reports and the
//! `check`, `reduce`, `solve` and `simulate` commands.

pub mod commands;
pub mod report;
pub mod scenario;

use singular_control::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const RUNTIME: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const NEGATIVE_VERDICT: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => exit::VALIDATION,
            CliError::Io(_) => exit::RUNTIME,
            CliError::Core(e) => match e {
                Error::NotConverged { .. } => exit::NOT_CONVERGED,
                Error::NumericalBreakdown(_) | Error::StateEscaped { .. } | Error::MixedGrids => exit::RUNTIME,
                _ => exit::VALIDATION,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
