use std::fmt;
use std::time::Duration;

use thiserror::Error;

/// Syntax or validation failure at a source position (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

/// Why a program cannot go through the compilation pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Unsupported {
    NonTight { atoms: Vec<String> },
    NonHcf { rule: String },
    Aggregates { rule: String },
    NonGroundUtility { atom: String },
}

impl fmt::Display for Unsupported {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unsupported::NonTight { atoms } => {
                write!(f, "program is not tight (positive cycle through {})", atoms.join(", "))
            }
            Unsupported::NonHcf { rule } => write!(f, "disjunction is not head-cycle-free: {rule}"),
            Unsupported::Aggregates { rule } => {
                write!(f, "aggregate outside a constraint cannot be compiled: {rule}")
            }
            Unsupported::NonGroundUtility { atom } => write!(f, "utility atom {atom} is not in the universe"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("unsafe variable {variable} in rule `{rule}`")]
    Unsafe { rule: String, variable: String },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("not a single-answer-set program: world {world} has {count} answer sets")]
    NotDegenerate { world: u64, count: usize },
    #[error("unsupported by the compilation pipeline: {0}")]
    Unsupported(Unsupported),
    #[error("invalid tree decomposition: {0}")]
    Decomposition(String),
    #[error("circuit purity violation: {0}")]
    Purity(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("timed out after {0:?}")]
    Timeout(Duration),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Semantic,
    Resource,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_) => ErrorKind::Parse,
            Error::Resource(_) | Error::Timeout(_) => ErrorKind::Resource,
            _ => ErrorKind::Semantic,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
