use std::fmt;
use std::process::ExitCode;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration (exit 1).
    Usage(String),
    /// Input data could not be read or processed (exit 2).
    Data(String),
    /// A result broke a guarantee the library makes (exit 3).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Data(_) => ExitCode::from(2),
            CliError::Internal(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<hilq::Error> for CliError {
    fn from(e: hilq::Error) -> Self {
        use hilq::Error::*;
        match e {
            UnsupportedCurve(_) | Config(_) | Capacity { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Turns a broken postcondition into an internal error.
pub fn ensure(cond: bool, what: impl FnOnce() -> String) -> CliResult {
    if cond {
        Ok(())
    } else {
        Err(CliError::Internal(what()))
    }
}
