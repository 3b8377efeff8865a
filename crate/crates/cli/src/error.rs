use std::fmt;
use std::process::ExitCode;

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Inconsistent or invalid flags (exit 2).
    Usage(String),
    /// Unreadable input or unwritable output (exit 3).
    Io(String),
    /// Malformed or unusable data (exit 4).
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Data(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl From<dcor_chisq::Error> for CliError {
    fn from(e: dcor_chisq::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
