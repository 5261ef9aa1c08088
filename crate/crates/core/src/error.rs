use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{what} too large for exhaustive evaluation ({count} > cap {cap}); {hint}")]
    TooLarge {
        what: &'static str,
        count: u128,
        cap: u128,
        hint: &'static str,
    },

    #[error("A·Aᵀ is numerically singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("solver diverged: {0}")]
    Divergence(String),

    #[error("condition P(k,S,p) not satisfied: {0}")]
    ConditionNotSatisfied(String),

    #[error("delta profile too short: {0}")]
    ProfileTooShort(String),

    #[error("direction {index}: {source}")]
    Direction {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures caused by reading or writing data rather than by
    /// the numerics.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Json(_) | Error::Format(_))
    }
}
