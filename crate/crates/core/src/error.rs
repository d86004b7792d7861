use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series has {len} values, need more than {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("series must be non-empty with finite values")]
    InvalidSeries,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("optimiser did not converge within {0} sweeps")]
    NonConvergence(usize),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("vertex {0} disappears between snapshots")]
    VertexRemoved(VertexId),
    #[error("malformed constraint system: {0}")]
    MalformedSystem(String),
    #[error("brute force supports at most {max} columns, got {got}")]
    TooManyColumns { got: usize, max: usize },
    #[error("branch and bound exceeded {0} nodes")]
    NodeLimit(usize),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("snapshot {snapshot} has {edges} edges, need more than {needed}")]
    TooFewEdges { snapshot: usize, edges: usize, needed: usize },
    #[error("io error: {0}")]
    Io(String),
    #[error("{malformed} of {total} lines malformed (first at line {first_line})")]
    MalformedInput { malformed: usize, total: usize, first_line: usize },
    #[error("first window (boundary {0}) contains no edges")]
    EmptySnapshot(i64),
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
