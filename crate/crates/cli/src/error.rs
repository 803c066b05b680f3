use std::fmt;

use digitcast_core::Error as CoreError;

/// Failures surfaced by the command-line tool.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations (exit code 2).
    Usage(String),
    /// Too little data for density fitting.
    TooFewSamples { found: usize, required: usize },
    Core(CoreError),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::TooFewSamples { .. } => "too_few_samples",
            CliError::Core(e) => e.category(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::TooFewSamples { found, required } => {
                write!(f, "{found} samples given, at least {required} needed")
            }
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
