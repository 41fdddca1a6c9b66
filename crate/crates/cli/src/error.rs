use conelab::GeomError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DslError {
    #[error("{line}:{col}: expected {}, found {found}", expected.join(" or "))]
    Parse {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{line}:{col}: unknown identifier `{name}`")]
    UnknownIdentifier { name: String, line: usize, col: usize },
    #[error("metric entry ({row},{col}) `{upper}` does not match ({col},{row}) `{lower}`")]
    AsymmetricMetric {
        row: usize,
        col: usize,
        upper: String,
        lower: String,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

pub fn invalid(line: usize, message: impl Into<String>) -> DslError {
    DslError::Invalid {
        line,
        message: message.into(),
    }
}

pub fn usage(message: impl Into<String>) -> DslError {
    DslError::Usage(message.into())
}
