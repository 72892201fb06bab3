//! Static graphs, multigraphs and the dynamic path/cycle system.

mod io;
mod multigraph;
mod static_graph;
mod system;

pub use io::{read_edge_list, write_edge_list, EdgeListError};
pub use multigraph::Multigraph;
pub use static_graph::{BitMatrix, StaticGraph};
pub use system::{ComponentKind, ComponentView, PathCycleSystem, SpliceDelta, SpliceError, SystemError};

use thiserror::Error;

/// Dense zero-based vertex index.
pub type VertexId = usize;

/// Unordered edge stored with the smaller endpoint first.
pub type Edge = (VertexId, VertexId);

/// Normalizes an unordered pair.
#[inline]
pub fn edge(u: VertexId, v: VertexId) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for n = {n}")]
    OutOfRange { vertex: VertexId, n: usize },
    #[error("loop at vertex {0}")]
    Loop(VertexId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(VertexId, VertexId),
}
