use thiserror::Error;

/// Errors raised by the library.
///
/// The variants fall into two families that the CLI maps to different exit
/// codes: input/config problems ([`Error::SizeLimit`], [`Error::InvalidInput`],
/// [`Error::Config`], [`Error::Json`]) and mathematical domain violations
/// (everything else).
#[derive(Debug, Error)]
pub enum Error {
    #[error("size limit exceeded: {what} = {value} (allowed {min}..={max})")]
    SizeLimit {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("singular element: {0}")]
    Singular(String),

    #[error("composition requires an inner series vanishing at 0 (found |g(0)| = {0:e})")]
    CompositionDomain(f64),

    #[error("not invertible: {0}")]
    NonInvertible(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("incomplete model: {0}")]
    IncompleteModel(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed input or configuration rather
    /// than by a mathematical domain violation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::SizeLimit { .. } | Error::InvalidInput(_) | Error::Config(_) | Error::Json(_)
        )
    }

    pub(crate) fn size(what: &'static str, value: usize, min: usize, max: usize) -> Self {
        Error::SizeLimit {
            what,
            value,
            min,
            max,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
