use super::{StaticGraph, VertexId};

/// Multigraph on `0..n`; loops allowed and counted twice toward degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    degree: Vec<usize>,
}

impl Multigraph {
    pub fn new(n: usize) -> Self {
        Multigraph { n, edges: Vec::new(), degree: vec![0; n] }
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        self.edges.push((a, b));
        self.degree[a] += 1;
        self.degree[b] += 1;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edge multiset with each pair ordered `(min, max)`.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.degree[v]
    }

    pub fn loop_count(&self) -> usize {
        self.edges.iter().filter(|(u, v)| u == v).count()
    }

    /// Number of extra copies beyond the first among repeated pairs.
    pub fn parallel_excess(&self) -> usize {
        let mut sorted: Vec<_> = self.edges.iter().filter(|(u, v)| u != v).copied().collect();
        sorted.sort_unstable();
        sorted.windows(2).filter(|w| w[0] == w[1]).count()
    }

    pub fn is_simple(&self) -> bool {
        self.loop_count() == 0 && self.parallel_excess() == 0
    }

    /// The underlying simple graph, or `None` when a loop or parallel edge exists.
    pub fn to_simple(&self) -> Option<StaticGraph> {
        if !self.is_simple() {
            return None;
        }
        StaticGraph::from_edges(self.n, self.edges.iter().copied()).ok()
    }

    /// Connected components, counting a vertex with only a loop as one.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut count = self.n;
        for &(u, v) in &self.edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a] = b;
                count -= 1;
            }
        }
        count
    }
}
