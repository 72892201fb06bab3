//! Cycle certificates, brute-force pancyclicity, component statistics and the
//! `K_r`-factor estimators.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config_model::{
    random_perfect_matching, reveal_two_factor_components, sample_configuration, sample_simple_regular, trial_rng,
    ConfigError, Point, DEFAULT_MAX_ATTEMPTS,
};
use crate::graph::{StaticGraph, VertexId};

/// Largest `n` accepted by the backtracking oracles.
pub const BRUTE_FORCE_MAX_N: usize = 16;

/// A claimed cycle: consecutive vertices (cyclically) must be adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCertificate {
    pub k: usize,
    pub vertices: Vec<VertexId>,
}

impl CycleCertificate {
    pub fn new(vertices: Vec<VertexId>) -> Self {
        CycleCertificate { k: vertices.len(), vertices }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CycleViolation {
    #[error("claimed length {claimed} but {actual} vertices listed")]
    LengthMismatch { claimed: usize, actual: usize },
    #[error("length {0} is below 3")]
    TooShort(usize),
    #[error("vertex {0} out of range")]
    OutOfRange(VertexId),
    #[error("vertex {0} repeated")]
    Duplicate(VertexId),
    #[error("{0}-{1} is not an edge")]
    MissingEdge(VertexId, VertexId),
}

/// Checks `cert` against `host`, reporting the first violation.
pub fn validate_cycle(host: &StaticGraph, cert: &CycleCertificate) -> Result<(), CycleViolation> {
    validate_cycle_with(host.n(), |u, v| host.has_edge(u, v), cert)
}

/// Like [`validate_cycle`] with adjacency given as a predicate.
pub fn validate_cycle_with(
    n: usize,
    adjacent: impl Fn(VertexId, VertexId) -> bool,
    cert: &CycleCertificate,
) -> Result<(), CycleViolation> {
    let vs = &cert.vertices;
    if vs.len() != cert.k {
        return Err(CycleViolation::LengthMismatch { claimed: cert.k, actual: vs.len() });
    }
    if vs.len() < 3 {
        return Err(CycleViolation::TooShort(vs.len()));
    }
    let mut seen = vec![false; n];
    for &v in vs {
        if v >= n {
            return Err(CycleViolation::OutOfRange(v));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(CycleViolation::Duplicate(v));
        }
    }
    for i in 0..vs.len() {
        let (u, v) = (vs[i], vs[(i + 1) % vs.len()]);
        if !adjacent(u, v) {
            return Err(CycleViolation::MissingEdge(u, v));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("n = {0} exceeds the brute-force limit {BRUTE_FORCE_MAX_N}")]
    TooLarge(usize),
    #[error(transparent)]
    Sampler(#[from] ConfigError),
}

/// Which cycle lengths a graph contains.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleLengths {
    pub n: usize,
    /// `has[k]` for `k in 0..=n`; entries below 3 are false.
    pub has: Vec<bool>,
}

impl CycleLengths {
    pub fn contains(&self, k: usize) -> bool {
        self.has.get(k).copied().unwrap_or(false)
    }

    pub fn is_pancyclic(&self) -> bool {
        self.n >= 3 && (3..=self.n).all(|k| self.has[k])
    }

    pub fn is_hamiltonian(&self) -> bool {
        self.contains(self.n)
    }
}

/// Exact cycle-length spectrum by backtracking from each smallest vertex.
pub fn is_pancyclic_bruteforce(g: &StaticGraph) -> Result<CycleLengths, VerifyError> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(VerifyError::TooLarge(n));
    }
    let mut has = vec![false; n + 1];
    for k in 3..=n {
        has[k] = (0..n).any(|s| {
            let mut on = vec![false; n];
            on[s] = true;
            cycle_from(g, s, s, 1, k, &mut on)
        });
    }
    Ok(CycleLengths { n, has })
}

fn cycle_from(g: &StaticGraph, start: usize, cur: usize, len: usize, k: usize, on: &mut [bool]) -> bool {
    if len == k {
        return g.has_edge(cur, start);
    }
    for &w in g.neighbors(cur) {
        // the start is the smallest vertex of the cycle
        if w > start && !on[w] {
            on[w] = true;
            let found = cycle_from(g, start, w, len + 1, k, on);
            on[w] = false;
            if found {
                return true;
            }
        }
    }
    false
}

/// Hamiltonicity by backtracking (`n ≤ 16`).
pub fn has_hamilton_cycle_bruteforce(g: &StaticGraph) -> Result<bool, VerifyError> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(VerifyError::TooLarge(n));
    }
    if n < 3 {
        return Ok(false);
    }
    let mut on = vec![false; n];
    on[0] = true;
    Ok(cycle_from(g, 0, 0, 1, n, &mut on))
}

/// `Σ_{i=1}^n 1/(2i−1)` exactly.
pub fn expected_components_2factor_exact(n: usize) -> BigRational {
    let mut sum = BigRational::zero();
    for i in 1..=n {
        sum += BigRational::new(BigInt::one(), BigInt::from(2 * i - 1));
    }
    sum
}

/// Expected number of components of the configuration-model 2-factor on `n`
/// vertices, `Σ_{i=1}^n 1/(2i−1)`, summed smallest terms first.
pub fn expected_components_2factor(n: usize) -> f64 {
    (1..=n).rev().map(|i| 1.0 / (2 * i - 1) as f64).sum()
}

/// What to sample in [`component_stats`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SamplerSpec {
    /// The configuration multigraph `G(M)` with `d = 2`, loops and double edges kept.
    TwoFactorConfiguration { n: usize },
    /// A uniform simple 2-regular graph.
    TwoFactorSimple { n: usize },
    /// `M ∪ G` for the given perfect matching `M` (partner map) and a uniform
    /// simple perfect matching `G`; shared edges count as 2-cycles.
    MatchingUnion { matching: Vec<VertexId> },
    /// `M ∪ G` with a fresh uniform `M` in every trial.
    RandomMatchingUnion { n: usize },
}

/// One trial's observations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentSample {
    pub components: usize,
    pub cycles: usize,
    /// `|E(M) ∩ E(G)|` for matching unions, 0 otherwise.
    pub shared_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentStats {
    pub trials: usize,
    pub mean_components: f64,
    pub var_components: f64,
    pub mean_cycles: f64,
    pub samples: Vec<ComponentSample>,
}

impl ComponentStats {
    fn from_samples(samples: Vec<ComponentSample>) -> Self {
        let t = samples.len() as f64;
        let mean = samples.iter().map(|s| s.components as f64).sum::<f64>() / t;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s.components as f64 - mean).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        let mean_cycles = samples.iter().map(|s| s.cycles as f64).sum::<f64>() / t;
        ComponentStats { trials: samples.len(), mean_components: mean, var_components: var, mean_cycles, samples }
    }

    /// Fraction of samples satisfying `pred`.
    pub fn fraction(&self, pred: impl Fn(&ComponentSample) -> bool) -> f64 {
        self.samples.iter().filter(|s| pred(s)).count() as f64 / self.trials as f64
    }
}

/// Samples `trials` instances of `spec`, trial `i` drawing from
/// `trial_rng(seed, i)`.
pub fn component_stats(spec: &SamplerSpec, trials: usize, seed: u64) -> Result<ComponentStats, VerifyError> {
    assert!(trials >= 1, "component_stats needs at least one trial");
    let samples: Result<Vec<_>, ConfigError> =
        (0..trials as u64).into_par_iter().map(|t| one_sample(spec, &mut trial_rng(seed, t))).collect();
    Ok(ComponentStats::from_samples(samples?))
}

fn one_sample<R: Rng + ?Sized>(spec: &SamplerSpec, rng: &mut R) -> Result<ComponentSample, ConfigError> {
    match spec {
        SamplerSpec::TwoFactorConfiguration { n } => {
            let (_, components) = reveal_two_factor_components(*n, rng)?;
            Ok(ComponentSample { components, cycles: components, shared_edges: 0 })
        }
        SamplerSpec::TwoFactorSimple { n } => {
            let g = sample_simple_regular(*n, 2, rng, DEFAULT_MAX_ATTEMPTS)?;
            let c = union_find_components(g.n(), g.edges());
            Ok(ComponentSample { components: c, cycles: c, shared_edges: 0 })
        }
        SamplerSpec::MatchingUnion { matching } => Ok(matching_union_sample(matching, rng)?),
        SamplerSpec::RandomMatchingUnion { n } => {
            let m = random_perfect_matching(*n, rng)?;
            Ok(matching_union_sample(&m, rng)?)
        }
    }
}

fn matching_union_sample<R: Rng + ?Sized>(m: &[VertexId], rng: &mut R) -> Result<ComponentSample, ConfigError> {
    let n = m.len();
    let cfg = sample_configuration(n, 1, rng)?;
    let g: Vec<VertexId> = (0..n).map(|v| cfg.partner(Point::new(v, 0)).owner).collect();
    let shared = (0..n).filter(|&v| v < m[v] && g[v] == m[v]).count();
    let edges = (0..n).filter(|&v| v < m[v]).map(|v| (v, m[v])).chain((0..n).filter(|&v| v < g[v]).map(|v| (v, g[v])));
    let c = union_find_components(n, edges);
    // both are perfect matchings, so every component is an even cycle
    Ok(ComponentSample { components: c, cycles: c, shared_edges: shared })
}

fn union_find_components(n: usize, edges: impl Iterator<Item = (VertexId, VertexId)>) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = n;
    for (u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            count -= 1;
        }
    }
    count
}

/// `|{z ∈ A : N_G(z) ∩ B ≠ ∅}|` with `A`, `B` as membership masks.
pub fn edge_distribution_count(g: &StaticGraph, a: &[bool], b: &[bool]) -> usize {
    (0..g.n()).filter(|&z| a[z] && g.neighbors(z).iter().any(|&w| b[w])).count()
}

/// Per-size estimates `E[X_s] ≈ (n/r)·C(r,s)·(1−α)^s·α^{r−s}` for `s = 1..=r`
/// (index `s−1`) and their closed-form total `(n/r)(1−α^r)`.
pub fn kr_expected_components(n: usize, r: usize, alpha: f64) -> (Vec<f64>, f64) {
    assert!(r >= 1 && alpha > 0.0 && alpha < 1.0, "need r >= 1 and 0 < alpha < 1");
    let base = n as f64 / r as f64;
    let mut binom = 1.0;
    let mut per_size = Vec::with_capacity(r);
    for s in 1..=r {
        binom = binom * (r - s + 1) as f64 / s as f64;
        per_size.push(base * binom * (1.0 - alpha).powi(s as i32) * alpha.powi((r - s) as i32));
    }
    (per_size, base * (1.0 - alpha.powi(r as i32)))
}

/// Positive root of `x^r + r·x − 1`, by bisection on `[0, 1]`.
pub fn kr_threshold_root(r: usize) -> f64 {
    assert!(r >= 1, "r must be positive");
    let f = |x: f64| x.powi(r as i32) + r as f64 * x - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One CSV row of per-trial statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub trial: u64,
    pub n: usize,
    pub d: usize,
    pub statistic: String,
    pub value: f64,
}

pub fn write_stats_csv<W: Write>(out: W, rows: &[StatRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["trial", "n", "d", "statistic", "value"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Mean, sample standard deviation and linearly interpolated quartiles.
pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let stddev = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    let q = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let (i, frac) = (pos.floor() as usize, pos.fract());
        if i + 1 < v.len() {
            v[i] + frac * (v[i + 1] - v[i])
        } else {
            v[i]
        }
    };
    Some(Summary { count: v.len(), mean, stddev, min: v[0], q25: q(0.25), median: q(0.5), q75: q(0.75), max: v[v.len() - 1] })
}
