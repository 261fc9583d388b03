use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("state has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("zero state has no ray")]
    ZeroState,
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("no tensor factor labelled {0:?}")]
    UnknownFactor(String),
    #[error("contradictory selection: {0}")]
    ContradictorySelection(String),
    #[error("invariant breached: {0}")]
    InvariantBreach(String),
    #[error("{count} history labels exceed the cap of {cap}; coarse-grain the family")]
    TooManyLabels { count: u128, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
