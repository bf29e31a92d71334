use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// Tokens that would have been accepted at this position.
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

#[derive(Debug, Error)]
pub enum DslError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{line}:{column}: name `{name}` is not bound")]
    Name { name: String, line: usize, column: usize },
    #[error("{line}:{column}: {message}")]
    Usage {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: {source}")]
    Engine {
        #[source]
        source: vca_core::Error,
        line: usize,
        column: usize,
    },
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl DslError {
    /// The engine error underneath, if any (safety verdicts live there).
    pub fn engine(&self) -> Option<&vca_core::Error> {
        match self {
            DslError::Engine { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, DslError>;
