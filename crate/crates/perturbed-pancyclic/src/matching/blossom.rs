//! Maximum matching in general graphs by augmenting search with blossom contraction.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Edge, StaticGraph, VertexId};

const NONE: usize = usize::MAX;

/// A set of pairwise-disjoint edges stored as a partner map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Matching {
    mate: Vec<Option<VertexId>>,
    size: usize,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("vertex {0} is covered twice")]
    Overlap(VertexId),
    #[error("edge {0}-{1} is out of range or a loop")]
    BadEdge(VertexId, VertexId),
    #[error("edge {0}-{1} is not in the graph")]
    NotInGraph(VertexId, VertexId),
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching { mate: vec![None; n], size: 0 }
    }

    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self, MatchingError> {
        let mut m = Matching::empty(n);
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(MatchingError::BadEdge(a, b));
            }
            for v in [a, b] {
                if m.mate[v].is_some() {
                    return Err(MatchingError::Overlap(v));
                }
            }
            m.mate[a] = Some(b);
            m.mate[b] = Some(a);
            m.size += 1;
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.mate.len()
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn partner(&self, v: VertexId) -> Option<VertexId> {
        self.mate[v]
    }

    pub fn is_covered(&self, v: VertexId) -> bool {
        self.mate[v].is_some()
    }

    /// Vertices covered by the matching.
    pub fn covered(&self) -> usize {
        2 * self.size
    }

    pub fn edges(&self) -> Vec<Edge> {
        (0..self.n()).filter_map(|v| self.mate[v].filter(|&w| v < w).map(|w| (v, w))).collect()
    }

    /// Checks that every edge belongs to `g`.
    pub fn check_in(&self, g: &StaticGraph) -> Result<(), MatchingError> {
        match self.edges().into_iter().find(|&(a, b)| !g.has_edge(a, b)) {
            Some((a, b)) => Err(MatchingError::NotInGraph(a, b)),
            None => Ok(()),
        }
    }
}

/// Search tuning; both switches leave the result maximum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchingOptions {
    /// Start from a greedy maximal matching.
    pub greedy_start: bool,
    /// Drop vertices of a failed search tree from later searches.
    pub prune: bool,
}

impl Default for MatchingOptions {
    fn default() -> Self {
        MatchingOptions { greedy_start: true, prune: true }
    }
}

pub fn max_matching(g: &StaticGraph) -> Matching {
    max_matching_with(g, MatchingOptions::default())
}

pub fn max_matching_with(g: &StaticGraph, opts: MatchingOptions) -> Matching {
    let n = g.n();
    let mut s = Search::new(n);
    if opts.greedy_start {
        for v in 0..n {
            if s.mate[v] == NONE {
                if let Some(&w) = g.neighbors(v).iter().find(|&&w| s.mate[w] == NONE) {
                    s.mate[v] = w;
                    s.mate[w] = v;
                }
            }
        }
    }
    let mut dead = vec![false; n];
    for root in 0..n {
        if s.mate[root] != NONE || dead[root] {
            continue;
        }
        match s.find_path(g, root, &dead) {
            Some(end) => s.augment(end),
            None if opts.prune => {
                for v in 0..n {
                    if s.used[v] || s.parent[v] != NONE {
                        dead[v] = true;
                    }
                }
            }
            None => {}
        }
    }
    let mut m = Matching::empty(n);
    for v in 0..n {
        if s.mate[v] != NONE {
            m.mate[v] = Some(s.mate[v]);
        }
    }
    m.size = m.mate.iter().flatten().count() / 2;
    m
}

struct Search {
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl Search {
    fn new(n: usize) -> Self {
        Search {
            mate: vec![NONE; n],
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.mate.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.blossom[self.base[v]] = true;
            self.blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    fn find_path(&mut self, g: &StaticGraph, root: usize, dead: &[bool]) -> Option<usize> {
        let n = self.mate.len();
        self.used.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in g.neighbors(v) {
                if dead[to] || self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let next = self.mate[to];
                    self.used[next] = true;
                    self.queue.push_back(next);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let ppv = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = ppv;
        }
    }
}

/// Exhaustive maximum matching size; exponential, for cross-checks on tiny graphs.
pub fn max_matching_size_bruteforce(g: &StaticGraph) -> usize {
    fn go(g: &StaticGraph, v: usize, used: &mut [bool]) -> usize {
        let n = g.n();
        let Some(v) = (v..n).find(|&u| !used[u]) else { return 0 };
        used[v] = true;
        let mut best = go(g, v + 1, used);
        for &w in g.neighbors(v) {
            if !used[w] {
                used[w] = true;
                best = best.max(1 + go(g, v + 1, used));
                used[w] = false;
            }
        }
        used[v] = false;
        best
    }
    go(g, 0, &mut vec![false; g.n()])
}
