use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    BackendLimit,
    Invariant,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown transform index {index} (system has {count})")]
    UnknownTransform { index: usize, count: usize },
    #[error("coordinate {coordinate} exceeds horizon bound {bound}")]
    HorizonExceeded { coordinate: i128, bound: i64 },
    #[error("atom spans {cells} cells, above the combinatorial limit of {limit}")]
    CellLimit { cells: usize, limit: usize },
    #[error("invalid probability vector: {0}")]
    InvalidWeights(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("window [{m}, {n}) outside available range [{lo}, {hi}]")]
    Window { m: i64, n: i64, lo: i64, hi: i64 },
    #[error("entry n={0} is unavailable")]
    Unavailable(i64),
    #[error("partition of factor {factor} does not cover the space (total measure {total})")]
    PartitionNotCovering { factor: usize, total: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::CellLimit { .. } | Error::HorizonExceeded { .. } | Error::Unavailable(_) => ErrorKind::BackendLimit,
            Error::InvariantViolation(_) => ErrorKind::Invariant,
            _ => ErrorKind::Validation,
        }
    }

    /// Short remediation hint for command-line users, when one applies.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            Error::CellLimit { .. } => Some("cell limit exceeded; use mc"),
            Error::HorizonExceeded { .. } => Some("horizon too large; reduce n"),
            Error::Unavailable(_) => Some("series has unavailable entries; use mc"),
            _ => None,
        }
    }
}
