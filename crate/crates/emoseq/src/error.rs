use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A probability fell outside `[0, 1]` (or was NaN).
    #[error("value {value} is outside [0,1]{}", location_suffix(.location))]
    Domain {
        value: f64,
        location: Option<String>,
    },

    /// A line could not be parsed in the declared format.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// The same (thread_id, index) pair appeared twice in one file.
    #[error("duplicate record for thread {thread_id:?} index {index}")]
    DuplicateRecord { thread_id: String, index: usize },

    /// Comment indices within a thread are not contiguous from 0.
    #[error("thread {thread_id:?} has non-contiguous comment indices (expected {expected}, found {found})")]
    Contiguity {
        thread_id: String,
        expected: usize,
        found: usize,
    },

    /// An argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A statistic had no defined entries or no input events.
    #[error("empty result: {0}")]
    EmptyResult(String),

    /// No thread contributed a (x_{n-2}, x_{n-1}, x_n) triple.
    #[error("no triples: every thread is shorter than 3 comments")]
    NoTriples,

    /// The analytic oracle's preconditions do not hold for this model.
    #[error("oracle error: {0}")]
    Oracle(String),

    /// I/O failure carrying the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed generator configuration file.
    #[error("config error: {0}")]
    Config(String),
}

fn location_suffix(location: &Option<String>) -> String {
    match location {
        Some(loc) => format!(" at {loc}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn domain(value: f64) -> Self {
        Error::Domain {
            value,
            location: None,
        }
    }

    pub(crate) fn domain_at(value: f64, location: impl Into<String>) -> Self {
        Error::Domain {
            value,
            location: Some(location.into()),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
