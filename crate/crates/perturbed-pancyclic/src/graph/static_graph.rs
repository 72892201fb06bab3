use std::collections::HashSet;

use super::{edge, Edge, GraphError, VertexId};

/// Immutable simple graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticGraph {
    n: usize,
    adj: Vec<Vec<VertexId>>,
    edge_count: usize,
}

impl StaticGraph {
    pub fn empty(n: usize) -> Self {
        StaticGraph { n, adj: vec![Vec::new(); n], edge_count: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n).map(|v| (0..n).filter(|&u| u != v).collect()).collect();
        StaticGraph { n, adj, edge_count: n * n.saturating_sub(1) / 2 }
    }

    /// Builds a graph from an edge list, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::OutOfRange { vertex: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::Loop(u));
            }
            if !seen.insert(edge(u, v)) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(StaticGraph { n, adj, edge_count: seen.len() })
    }

    /// Trusted constructor for generators that emit distinct, in-range,
    /// loop-free edges.
    pub(crate) fn from_distinct_edges(n: usize, edges: &[Edge]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            debug_assert!(u != v && u < n && v < n);
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            debug_assert!(list.windows(2).all(|w| w[0] < w[1]), "duplicate edge");
        }
        StaticGraph { n, adj, edge_count: edges.len() }
    }

    /// Like `from_edges` but silently merges duplicates. Loops are still errors.
    pub fn from_edges_dedup<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        let set: HashSet<Edge> = edges.into_iter().map(|(u, v)| edge(u, v)).collect();
        let mut list: Vec<Edge> = set.into_iter().collect();
        list.sort_unstable();
        Self::from_edges(n, list)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Union of two graphs on the same vertex set.
    pub fn union(&self, other: &StaticGraph) -> StaticGraph {
        assert_eq!(self.n, other.n, "union of graphs on different vertex sets");
        let adj: Vec<Vec<VertexId>> = self
            .adj
            .iter()
            .zip(&other.adj)
            .map(|(a, b)| {
                let mut merged = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() || j < b.len() {
                    let next = match (a.get(i), b.get(j)) {
                        (Some(&x), Some(&y)) if x == y => {
                            i += 1;
                            j += 1;
                            x
                        }
                        (Some(&x), Some(&y)) if x < y => {
                            i += 1;
                            x
                        }
                        (Some(_), Some(&y)) => {
                            j += 1;
                            y
                        }
                        (Some(&x), None) => {
                            i += 1;
                            x
                        }
                        (None, Some(&y)) => {
                            j += 1;
                            y
                        }
                        (None, None) => unreachable!(),
                    };
                    merged.push(next);
                }
                merged
            })
            .collect();
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        StaticGraph { n: self.n, adj, edge_count }
    }

    /// Number of edges with both endpoints in `set` (given as a membership mask).
    pub fn edges_within(&self, mask: &[bool]) -> usize {
        self.edges().filter(|&(u, v)| mask[u] && mask[v]).count()
    }

    /// Dense adjacency bitset for constant-time membership tests.
    pub fn bit_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::new(self.n);
        for (u, v) in self.edges() {
            m.set(u, v);
            m.set(v, u);
        }
        m
    }
}

/// Row-major n×n bit matrix.
#[derive(Clone, Debug)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix { n, words, bits: vec![0; words * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }
}
