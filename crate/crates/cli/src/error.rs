//! Error type shared by all subcommands, carrying the process exit code.
//!
//! Two failure classes are distinguished: problems with the inputs
//! (unreadable files, malformed CSV/JSON, inconsistent priors — exit 2)
//! and numerical failures while fitting (exit 3). Everything a user can
//! fix by editing their files is a validation error.

use std::path::Path;

use tcam_core::lasso::LassoError;
use tcam_core::pipeline::PipelineError;
use tcam_core::smooth::SmoothError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }

    /// Validation error annotated with the offending file.
    pub fn in_file(path: &Path, msg: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{}: {msg}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match &e {
            PipelineError::Smooth(SmoothError::Factorization { .. })
            | PipelineError::Lasso(LassoError::DegenerateFold { .. }) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}
