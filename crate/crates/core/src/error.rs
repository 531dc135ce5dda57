use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("unknown edge {0}-{1}")]
    UnknownEdge(VertexId, VertexId),
    #[error("edge {0}-{1} has no weight")]
    MissingWeight(VertexId, VertexId),
    #[error("vertex {0} has no label")]
    MissingLabel(VertexId),
    #[error("vertex {0} has degree 0 and cannot be encoded")]
    IsolatedVertex(VertexId),
    #[error("graph is not 3-regular (vertex {0} has degree {1})")]
    NotCubic(VertexId, usize),
    #[error("invalid edge coloring: {0}")]
    InvalidColoring(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("view too shallow: {0}")]
    InsufficientDepth(String),
    #[error("probabilities sum to {0}, expected 1")]
    ProbabilitySum(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

pub type Result<T> = std::result::Result<T, Error>;
