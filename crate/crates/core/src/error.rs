use std::path::PathBuf;

/// Errors returned by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value needs more digits than the encoding allows.
    #[error("value {value} needs {digits} digits, more than the limit of {max_digits}")]
    Overflow {
        value: f64,
        digits: usize,
        max_digits: usize,
    },
    /// A negative value was given to an unsigned encoding.
    #[error("negative value {0} cannot be encoded without a sign")]
    NegativeUnsigned(f64),
    /// A configuration violates one of its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// The input series is malformed.
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    /// The series has no observed values.
    #[error("series has no observed values")]
    EmptySeries,
    /// Inputs that must have matching lengths do not.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    /// A required input was empty.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    /// An argument was outside its valid domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A token log-probability map did not contain the token being scored.
    #[error("token coverage: {0}")]
    Coverage(String),
    /// A string contained characters outside the model alphabet.
    #[error("character {0:?} is not in the model alphabet")]
    Alphabet(char),
    /// The backend cannot perform the requested operation.
    #[error("backend {backend} does not support {capability}")]
    Unsupported {
        backend: String,
        capability: &'static str,
    },
    /// The request would exceed the configured token budget.
    #[error("token budget exceeded: {requested} > {budget}")]
    BudgetExceeded { requested: usize, budget: usize },
    /// Transport failure after all retries.
    #[error("transport error after {attempts} attempts: {message}")]
    Transport { attempts: usize, message: String },
    /// The backend answered with something that does not fit the protocol.
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    /// Replay mode found no fixture for a request.
    #[error("no fixture recorded for request {0}")]
    FixtureMissing(String),
    /// Not enough usable samples survived decoding.
    #[error("only {valid} valid samples, need at least {required}")]
    InsufficientSamples { valid: usize, required: usize },
    /// The naive predictor has zero error, so normalization is undefined.
    #[error("naive forecast error is zero; normalized MAE is undefined")]
    DegenerateNaive,
    /// Every configuration in a tuning grid failed.
    #[error("all {0} grid configurations failed")]
    AllConfigsFailed(usize),
    /// Unknown synthetic series name.
    #[error("unknown synthetic series {0:?}")]
    UnknownName(String),
    /// Failed to parse a file.
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable, machine-readable category name for the error.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Overflow { .. } | Error::NegativeUnsigned(_) => "encoding",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidSeries(_) | Error::EmptySeries => "invalid_series",
            Error::LengthMismatch { .. } | Error::EmptyInput(_) | Error::InvalidArgument(_) => {
                "invalid_argument"
            }
            Error::Coverage(_) => "coverage",
            Error::Alphabet(_) => "alphabet",
            Error::Unsupported { .. } => "unsupported",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::Transport { .. } => "transport",
            Error::MalformedResponse(_) => "malformed_response",
            Error::FixtureMissing(_) => "fixture_missing",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::DegenerateNaive => "degenerate_naive",
            Error::AllConfigsFailed(_) => "all_configs_failed",
            Error::UnknownName(_) => "unknown_name",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
