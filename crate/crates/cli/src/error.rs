use std::process::ExitCode;

use landauer_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 2 for anything the caller can fix by changing the invocation, 3 when
    /// the numerics fail on valid input.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) | CliError::Output { .. } => 2,
            CliError::Core { source, .. } => match source {
                CoreError::InvalidParameter(_)
                | CoreError::InvalidBeta(_)
                | CoreError::InvalidSpectrum(_)
                | CoreError::IncompatiblePolicy(_)
                | CoreError::CapExceeded(_)
                | CoreError::Json(_) => 2,
                CoreError::InvalidDistribution(_)
                | CoreError::EnergyOutOfRange { .. }
                | CoreError::NoConvergence { .. }
                | CoreError::SupportViolation
                | CoreError::Infeasible(_) => 3,
            },
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches experiment context to core errors.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for landauer_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Core {
            context: what(),
            source,
        })
    }
}
