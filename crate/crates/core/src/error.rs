use crate::types::{EdgeKey, VertexId};
use thiserror::Error;

/// Failures reported by the forest, hierarchy and dendrogram operations.
///
/// Each variant is a distinct error code; `validate` and the CLI key off
/// the variant rather than the message.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(VertexId),
    #[error("non-finite weight")]
    NonFiniteWeight,
    #[error("self loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertices {0} and {1} are already connected")]
    AlreadyConnected(VertexId, VertexId),
    #[error("edge {0} would create a cycle")]
    WouldCreateCycle(EdgeKey),
    #[error("batch rejected, offending edges: {0:?}")]
    BatchRejected(Vec<EdgeKey>),
    #[error("no such edge {0}")]
    NoSuchEdge(EdgeKey),
    #[error("duplicate edge {0}")]
    DuplicateEdge(EdgeKey),
    #[error("vertices {0} and {1} are not connected")]
    NotConnected(VertexId, VertexId),
    #[error("query endpoints coincide at vertex {0}")]
    SameVertex(VertexId),
    #[error("path weights are not strictly increasing")]
    NonMonotonePath,
    #[error("query weights are not strictly increasing")]
    NonIncreasingQueries,
    #[error("spines belong to the same component")]
    SameComponent,
    #[error("heap order violated at {node}: parent {parent}")]
    HeapViolation { node: EdgeKey, parent: EdgeKey },
    #[error("parent pointers form a cycle through {0}")]
    Cycle(EdgeKey),
    #[error("dendrogram differs from the Kruskal reference at {0}")]
    OracleMismatch(EdgeKey),
    #[error("dendrogram hierarchy mirror is inconsistent: {0}")]
    MirrorMismatch(String),
    #[error("root bookkeeping is inconsistent: {0}")]
    RootMismatch(String),
    #[error("forest hierarchy is inconsistent: {0}")]
    ForestMismatch(String),
    #[error("no component contains vertex {0}")]
    NoSuchComponent(VertexId),
    #[error("batch is not a star")]
    NotAStar,
    #[error("position {pos} out of range for length {len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("position {0} is not an end of the sequence")]
    NotAnEnd(usize),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
