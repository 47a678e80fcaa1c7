use std::path::PathBuf;

use crate::types::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("alignment error: {what} has length {found}, expected {expected}")]
    Alignment {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid scenario: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("{}:{line}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("tariff coverage error at hour {hour} ({timestamp}): matched by {count} energy periods{}", fmt_names(.names))]
    Coverage {
        hour: usize,
        timestamp: String,
        count: usize,
        names: Vec<String>,
    },

    #[error("missing baseline point: {0}")]
    MissingBaseline(String),

    #[error("solver assignment is missing variable id {0}")]
    MissingVariable(usize),

    #[error("solver error: {0}")]
    Solver(#[from] crate::solver::SolverError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", .path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

fn fmt_names(names: &[String]) -> String {
    if names.is_empty() {
        String::new()
    } else {
        format!(" [{}]", names.join(", "))
    }
}
