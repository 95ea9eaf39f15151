use std::fmt;
use std::process::ExitCode;

/// A failure that ends a command, mapped onto the documented exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Config or flag rejected before any work was done (exit 3).
    Validation(String),
    /// Reading the config or writing an output failed (exit 2).
    Io(String),
    /// A numerical routine failed while running (exit 1).
    Numerical(String),
}

impl CliError {
    pub fn field(field: &str, msg: impl fmt::Display) -> Self {
        CliError::Validation(format!("{field}: {msg}"))
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<manakov_core::Error> for CliError {
    fn from(e: manakov_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}
