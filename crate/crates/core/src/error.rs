use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid regularizer: {0}")]
    InvalidRegularizer(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("incompatible pairing: {0}")]
    Incompatible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn mismatch(expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            expected: expected.into(),
            found: found.into(),
        }
    }

    /// Stable snake_case name of the variant, used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidModel(_) => "invalid_model",
            Error::InvalidRegularizer(_) => "invalid_regularizer",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Incompatible(_) => "incompatible",
            Error::Unsupported(_) => "unsupported",
            Error::TooLarge(_) => "too_large",
            Error::Undefined(_) => "undefined",
            Error::Numerical(_) => "numerical",
        }
    }

    /// Configuration-type errors (bad input) as opposed to numeric failures.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}
