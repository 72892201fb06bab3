//! Perturbed instances `H ∪ G`, available-edge queries and the deterministic
//! families of `H` used in experiments.

use std::collections::HashSet;
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config_model::{sample_simple_regular, ConfigError, DEFAULT_MAX_ATTEMPTS};
use crate::graph::{
    edge, read_edge_list, write_edge_list, BitMatrix, Edge, EdgeListError, GraphError, PathCycleSystem, StaticGraph,
    VertexId,
};

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error(transparent)]
    Sampler(#[from] ConfigError),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    EdgeList(#[from] EdgeListError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
}

/// Deterministic `H` together with a random regular `G` on the same vertices.
#[derive(Clone, Debug)]
pub struct PerturbedInstance {
    h: StaticGraph,
    g: StaticGraph,
    d: usize,
    h_bits: BitMatrix,
    union: StaticGraph,
}

impl PerturbedInstance {
    /// Pairs `h` with an explicit `g`; `g` must be `d`-regular.
    pub fn from_parts(h: StaticGraph, g: StaticGraph, d: usize) -> Result<Self, PerturbError> {
        if h.n() != g.n() {
            return Err(PerturbError::BadParams(format!("H has {} vertices, G has {}", h.n(), g.n())));
        }
        if let Some(v) = (0..g.n()).find(|&v| g.degree(v) != d) {
            return Err(PerturbError::BadParams(format!("G is not {d}-regular at vertex {v}")));
        }
        let h_bits = h.bit_matrix();
        let union = h.union(&g);
        Ok(PerturbedInstance { h, g, d, h_bits, union })
    }

    pub fn h(&self) -> &StaticGraph {
        &self.h
    }

    pub fn g(&self) -> &StaticGraph {
        &self.g
    }

    pub fn union(&self) -> &StaticGraph {
        &self.union
    }

    pub fn n(&self) -> usize {
        self.h.n()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `δ(H)/n`.
    pub fn alpha(&self) -> f64 {
        if self.n() == 0 {
            return 0.0;
        }
        self.h.min_degree() as f64 / self.n() as f64
    }

    #[inline]
    pub fn h_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.h_bits.get(u, v)
    }

    #[inline]
    pub fn g_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.g.has_edge(u, v)
    }

    #[inline]
    pub fn host_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.h_adjacent(u, v) || self.g_adjacent(u, v)
    }

    /// Available edges for the pair `(x, y)`: oriented pairs `(z, z')` with
    /// `zz' ∈ E(G)` present in `current` and not in `unavailable`,
    /// `z ∈ N_H(x)`, `z' ∈ N_H(y)`, and neither endpoint excluded.
    pub fn available_edges(
        &self,
        x: VertexId,
        y: VertexId,
        exclude: &dyn Fn(VertexId) -> bool,
        current: &PathCycleSystem,
        unavailable: &HashSet<Edge>,
    ) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for &z in self.h.neighbors(x) {
            if exclude(z) {
                continue;
            }
            for &w in self.g.neighbors(z) {
                if self.h_adjacent(y, w)
                    && !exclude(w)
                    && current.has_edge(z, w)
                    && !unavailable.contains(&edge(z, w))
                {
                    out.push((z, w));
                }
            }
        }
        out
    }

    /// `E_G(N_H(x) ∩ N_H(y) ∩ target)` minus `unavailable`, restricted to edges
    /// still present in `current`. Each edge appears once.
    pub fn available_common_edges(
        &self,
        x: VertexId,
        y: VertexId,
        target: &[bool],
        current: &PathCycleSystem,
        unavailable: &HashSet<Edge>,
    ) -> Vec<Edge> {
        let inside = |v: VertexId| target[v] && self.h_adjacent(x, v) && self.h_adjacent(y, v);
        let mut out = Vec::new();
        for &z in self.h.neighbors(x) {
            if !inside(z) {
                continue;
            }
            for &w in self.g.neighbors(z) {
                if z < w && inside(w) && current.has_edge(z, w) && !unavailable.contains(&(z, w)) {
                    out.push((z, w));
                }
            }
        }
        out
    }
}

/// Samples `G` as a uniform simple `d`-regular graph and pairs it with `h`.
pub fn build_instance<R: Rng + ?Sized>(h: StaticGraph, d: usize, rng: &mut R) -> Result<PerturbedInstance, PerturbError> {
    let g = sample_simple_regular(h.n(), d, rng, DEFAULT_MAX_ATTEMPTS)?;
    PerturbedInstance::from_parts(h, g, d)
}

/// Families of `H`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum Family {
    Complete,
    /// `K_{|A|,|B|}` with `A` the first `⌊αn⌋` vertices.
    UnbalancedBipartite { alpha: f64 },
    /// `K_{|A|,|B|}` with `|A| = ⌊ln n / 5⌋`.
    LognBipartite,
    /// Random graph of density `α + 0.05`, topped up to minimum degree `⌈αn⌉`.
    MinDegreeRandom { alpha: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Complete => "complete",
            Family::UnbalancedBipartite { .. } => "unbalanced-bipartite",
            Family::LognBipartite => "logn-bipartite",
            Family::MinDegreeRandom { .. } => "min-degree-random",
        }
    }

    /// Parses a family name, attaching `alpha` where the family takes one.
    pub fn parse(name: &str, alpha: f64) -> Result<Self, PerturbError> {
        match name {
            "complete" => Ok(Family::Complete),
            "unbalanced-bipartite" => Ok(Family::UnbalancedBipartite { alpha }),
            "logn-bipartite" => Ok(Family::LognBipartite),
            "min-degree-random" => Ok(Family::MinDegreeRandom { alpha }),
            other => Err(PerturbError::BadParams(format!("unknown family {other:?}"))),
        }
    }
}

impl FromStr for Family {
    type Err = PerturbError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::parse(s, 0.0)
    }
}

/// A family together with the vertex count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
}

/// Size of the small side of the unbalanced bipartite family.
pub fn small_side(n: usize, alpha: f64) -> usize {
    (alpha * n as f64 + 1e-9).floor() as usize
}

/// Complete bipartite graph between `0..a` and `a..n`.
pub fn complete_bipartite(n: usize, a: usize) -> StaticGraph {
    let edges: Vec<Edge> = (0..a).flat_map(|u| (a..n).map(move |v| (u, v))).collect();
    StaticGraph::from_distinct_edges(n, &edges)
}

impl ExtremalSpec {
    /// Checks the family parameters against `n` without building anything.
    pub fn validate(&self) -> Result<(), PerturbError> {
        let n = self.n;
        match self.family {
            Family::Complete => Ok(()),
            Family::UnbalancedBipartite { alpha } => {
                if !(alpha > 0.0 && alpha < 0.5) {
                    return Err(PerturbError::BadParams(format!(
                        "unbalanced-bipartite needs 0 < alpha < 1/2, got {alpha}"
                    )));
                }
                if small_side(n, alpha) == 0 {
                    return Err(PerturbError::BadParams(format!(
                        "alpha·n = {} leaves the small side empty",
                        alpha * n as f64
                    )));
                }
                Ok(())
            }
            Family::LognBipartite => {
                if n < 2 || logn_side(n) == 0 {
                    return Err(PerturbError::BadParams(format!("ln(n)/5 < 1 for n = {n}")));
                }
                Ok(())
            }
            Family::MinDegreeRandom { alpha } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(PerturbError::BadParams(format!("min-degree-random needs 0 < alpha < 1, got {alpha}")));
                }
                Ok(())
            }
        }
    }
}

fn logn_side(n: usize) -> usize {
    ((n as f64).ln() / 5.0).floor() as usize
}

/// Generates `H`. Only the random family consumes `rng`.
pub fn make_extremal<R: Rng + ?Sized>(spec: ExtremalSpec, rng: &mut R) -> Result<StaticGraph, PerturbError> {
    spec.validate()?;
    let n = spec.n;
    Ok(match spec.family {
        Family::Complete => StaticGraph::complete(n),
        Family::UnbalancedBipartite { alpha } => complete_bipartite(n, small_side(n, alpha)),
        Family::LognBipartite => complete_bipartite(n, logn_side(n)),
        Family::MinDegreeRandom { alpha } => min_degree_random(n, alpha, rng),
    })
}

fn min_degree_random<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> StaticGraph {
    let p = (alpha + 0.05).min(1.0);
    let target = ((alpha * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let target = target.min(n.saturating_sub(1));
    let mut bits = BitMatrix::new(n);
    let mut degree = vec![0usize; n];
    let mut edges = Vec::new();
    for (u, v) in binomial_pairs(n, p, rng) {
        bits.set(u, v);
        bits.set(v, u);
        degree[u] += 1;
        degree[v] += 1;
        edges.push((u, v));
    }
    let mut order: Vec<VertexId> = (0..n).collect();
    for v in 0..n {
        if degree[v] >= target {
            continue;
        }
        // prefer partners that are themselves deficient
        order.shuffle(rng);
        order.sort_by_key(|&u| degree[u] >= target);
        for &u in &order {
            if degree[v] >= target {
                break;
            }
            if u != v && !bits.get(u, v) {
                bits.set(u, v);
                bits.set(v, u);
                degree[u] += 1;
                degree[v] += 1;
                edges.push(edge(u, v));
            }
        }
    }
    StaticGraph::from_distinct_edges(n, &edges)
}

/// Each pair `u < v` independently with probability `p`, by geometric skips
/// over the pairs in lexicographic order.
fn binomial_pairs<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<Edge> {
    let mut out = Vec::new();
    if p <= 0.0 || n < 2 {
        return out;
    }
    if p >= 1.0 {
        return (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    }
    let log_q = (1.0 - p).ln();
    let (mut u, mut v) = (0usize, 0usize);
    loop {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor().min((n * n) as f64) as usize;
        v += 1 + skip;
        while u < n && v >= n {
            v = v - n + u + 2;
            u += 1;
        }
        if u + 1 >= n {
            return out;
        }
        out.push((u, v));
    }
}

/// `K_{|A|,|B|}` plus a clique on `clique` vertices of `B`, each also joined to
/// all of `A`. Perturbs the bipartite extremal graph so that a maximum
/// matching leaves fewer vertices of `B` exposed.
pub fn bipartite_plus_clique(n: usize, a: usize, clique: usize) -> StaticGraph {
    let mut edges: Vec<Edge> = (0..a).flat_map(|u| (a..n).map(move |v| (u, v))).collect();
    let start = n - clique;
    for u in start..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    StaticGraph::from_edges(n, edges).expect("valid edges")
}

/// JSON sidecar stored next to the two edge lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub seed: u64,
    pub family: String,
}

pub const H_FILE: &str = "H.txt";
pub const G_FILE: &str = "G.txt";
pub const META_FILE: &str = "instance.json";

/// Writes `H.txt`, `G.txt` and `instance.json` into `dir`.
pub fn write_instance(dir: &Path, inst: &PerturbedInstance, meta: &InstanceMeta) -> Result<(), PerturbError> {
    fs::create_dir_all(dir)?;
    write_edge_list(inst.h(), BufWriter::new(fs::File::create(dir.join(H_FILE))?))?;
    write_edge_list(inst.g(), BufWriter::new(fs::File::create(dir.join(G_FILE))?))?;
    fs::write(dir.join(META_FILE), serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

pub fn read_instance(dir: &Path) -> Result<(PerturbedInstance, InstanceMeta), PerturbError> {
    let h = read_edge_list(BufReader::new(fs::File::open(dir.join(H_FILE))?))?;
    let g = read_edge_list(BufReader::new(fs::File::open(dir.join(G_FILE))?))?;
    let meta: InstanceMeta = serde_json::from_str(&fs::read_to_string(dir.join(META_FILE))?)?;
    Ok((PerturbedInstance::from_parts(h, g, meta.d)?, meta))
}
