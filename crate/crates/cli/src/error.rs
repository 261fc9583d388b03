use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error("spec is not valid JSON at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("contradictory selection: {0}")]
    Contradictory(String),
    #[error("invariant breached: {0}")]
    Invariant(String),
    #[error("{path}: {source}")]
    Model {
        path: String,
        #[source]
        source: qtime_core::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Io = 1,
    Validation = 2,
    Contradictory = 3,
    Invariant = 4,
}

impl CliError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io {
            context: context.into(),
            source,
        }
    }

    /// Tags a core error with the model field path whose data caused it.
    pub fn model(path: impl Into<String>, source: qtime_core::Error) -> Self {
        match source {
            qtime_core::Error::ContradictorySelection(m) => Self::Contradictory(m),
            qtime_core::Error::InvariantBreach(m) => Self::Invariant(m),
            source => Self::Model {
                path: path.into(),
                source,
            },
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Validation { .. } | Self::Parse { .. } | Self::Model { .. } => ExitCode::Validation,
            Self::Io { .. } => ExitCode::Io,
            Self::Contradictory(_) => ExitCode::Contradictory,
            Self::Invariant(_) => ExitCode::Invariant,
        }
    }
}

/// Attaches a spec path to core results.
pub trait AtPath<T> {
    fn at(self, path: &str) -> Result<T, CliError>;
}

impl<T> AtPath<T> for qtime_core::Result<T> {
    fn at(self, path: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::model(path, e))
    }
}
