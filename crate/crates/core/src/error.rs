use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("input too short: need at least {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("grid too coarse: M = {m} but at least {min} intervals are required")]
    GridTooCoarse { m: usize, min: usize },

    #[error("singular matrix: zero pivot in column {pivot}")]
    Singular { pivot: usize },

    #[error("weight table too short: need {needed} entries, have {got}")]
    WeightsTooShort { needed: usize, got: usize },

    #[error("problem has no exact solution")]
    MissingExact,

    #[error("problem validation failed: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument { .. } => "invalid_argument",
            Error::TooShort { .. } => "too_short",
            Error::GridTooCoarse { .. } => "grid_too_coarse",
            Error::Singular { .. } => "singular",
            Error::WeightsTooShort { .. } => "weights_too_short",
            Error::MissingExact => "missing_exact",
            Error::Invalid(_) => "invalid_problem",
            Error::Expression(_) => "expression",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
