use std::fmt::Display;

/// Failure of a command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed arguments or input; exit code 1.
    #[error("{0}")]
    Validation(String),
    /// The solver failed to reach the accepted residual; exit code 2.
    #[error("{0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn field(name: impl Display, err: impl Display) -> Self {
        CliError::Validation(format!("{name}: {err}"))
    }

    pub fn io(err: impl Display) -> Self {
        CliError::Validation(format!("io: {err}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::NonConvergence(_) => 2,
        }
    }
}

impl From<rank1kit_core::Error> for CliError {
    fn from(e: rank1kit_core::Error) -> Self {
        match e {
            rank1kit_core::Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
