use thiserror::Error;

/// Failures of a run, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: exit code 1.
    #[error("{0}")]
    Validation(String),
    /// A numerical guard tripped or a self-check failed: exit code 2.
    #[error("{0}")]
    Numerical(String),
    /// Output could not be written: exit code 1.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn field(name: &str, reason: &str) -> Self {
        CliError::Validation(format!("invalid `{name}`: {reason}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<starlimit_core::Error> for CliError {
    fn from(e: starlimit_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}
