use std::fmt;

use thiserror::Error;

use crate::instance::ValidationReport;

/// Location-tagged failure while reading an instance or solution file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    /// 1-based column of the offending token.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum MwisError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),

    #[error("clique {clique} sums to {sum:e}; exp-domain values underflowed")]
    NumericalUnderflow { clique: usize, sum: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("solution is not independent: edge ({0}, {1}) has both endpoints selected")]
    NotIndependent(usize, usize),

    #[error("instance has {n} nodes, brute force is limited to {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("iteration limit reached with bracket [{primal}, {dual}]")]
    IterationLimit { primal: f64, dual: f64 },
}

pub type Result<T, E = MwisError> = std::result::Result<T, E>;
