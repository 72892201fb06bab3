//! Splitting the vertex set around a maximum matching into `A, B₁, B₂, C₁, C₂, R`.

use serde::Serialize;
use thiserror::Error;

use super::blossom::Matching;
use crate::graph::{StaticGraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Part {
    A,
    B1,
    B2,
    C1,
    C2,
    R,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("precondition: {0}")]
    Precondition(String),
    /// The supplied matching cannot be maximum.
    #[error("level {level}: {which}")]
    InvariantViolated { level: usize, which: &'static str },
}

/// One level of the layered construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Level {
    /// Vertices with at least two neighbours in the previous `second` set.
    pub first: Vec<VertexId>,
    /// Matching partners of `first`.
    pub second: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    part: Vec<Part>,
    pub alpha: f64,
    pub beta: f64,
    /// `|C₁|/n`.
    pub gamma1: f64,
    /// `|B₁|/n`.
    pub gamma2: f64,
    /// Levels `0..=stop+1`; level 0 has the uncovered vertices as `second`.
    pub levels: Vec<Level>,
    /// Last level kept in `B₁ ∪ B₂`.
    pub stop: usize,
}

impl Partition {
    pub fn n(&self) -> usize {
        self.part.len()
    }

    pub fn part(&self, v: VertexId) -> Part {
        self.part[v]
    }

    pub fn is(&self, v: VertexId, parts: &[Part]) -> bool {
        parts.contains(&self.part[v])
    }

    pub fn members(&self, p: Part) -> Vec<VertexId> {
        (0..self.n()).filter(|&v| self.part[v] == p).collect()
    }

    pub fn size(&self, p: Part) -> usize {
        self.part.iter().filter(|&&q| q == p).count()
    }

    pub fn mask(&self, parts: &[Part]) -> Vec<bool> {
        self.part.iter().map(|p| parts.contains(p)).collect()
    }
}

/// Smallest admissible `β` for `n` vertices.
pub fn beta_floor(n: usize) -> f64 {
    2.0 / (n as f64).sqrt()
}

/// Midpoint of `[2/√n, α/2)`.
pub fn default_beta(n: usize, alpha: f64) -> f64 {
    (beta_floor(n) + alpha / 2.0) / 2.0
}

fn count_into(h: &StaticGraph, v: VertexId, mask: &[bool]) -> usize {
    h.neighbors(v).iter().filter(|&&w| mask[w]).count()
}

/// Builds the partition from a maximum matching `m` of `h`.
pub fn partition(h: &StaticGraph, m: &Matching, alpha: f64, beta: f64) -> Result<Partition, PartitionError> {
    let n = h.n();
    let pre = |s: String| Err(PartitionError::Precondition(s));
    if m.n() != n {
        return pre("matching and graph sizes differ".into());
    }
    if !(alpha < 0.5) {
        return pre(format!("alpha = {alpha} must be below 1/2"));
    }
    if !(beta < alpha / 2.0) || beta < beta_floor(n) {
        return pre(format!("beta = {beta} must lie in [{:.4}, alpha/2)", beta_floor(n)));
    }
    if (h.min_degree() as f64) < alpha * n as f64 - 1e-9 {
        return pre(format!("minimum degree {} is below alpha n", h.min_degree()));
    }
    if m.check_in(h).is_err() {
        return pre("matching is not contained in H".into());
    }
    let deficit = n - m.covered();
    if (deficit as f64) < (n as f64).sqrt() {
        return pre(format!("matching leaves {deficit} < √n vertices uncovered"));
    }
    let mate = |v: VertexId| m.partner(v).expect("covered vertex");
    let uncovered: Vec<VertexId> = (0..n).filter(|&v| !m.is_covered(v)).collect();
    let mut taken = vec![false; n];
    let mut prev_mask = vec![false; n];
    for &v in &uncovered {
        taken[v] = true;
        prev_mask[v] = true;
    }
    if uncovered.iter().any(|&v| h.neighbors(v).iter().any(|&w| prev_mask[w])) {
        return Err(PartitionError::InvariantViolated { level: 0, which: "uncovered vertices are adjacent" });
    }
    let half = beta * n as f64 / 2.0;
    let mut levels = vec![Level { first: vec![], second: uncovered.clone() }];
    let mut count = vec![0usize; n];
    loop {
        let i = levels.len();
        let prev = &levels[i - 1].second;
        for &v in prev {
            for &w in h.neighbors(v) {
                count[w] += 1;
            }
        }
        let first: Vec<VertexId> = (0..n).filter(|&v| !taken[v] && m.is_covered(v) && count[v] >= 2).collect();
        for &v in prev {
            for &w in h.neighbors(v) {
                count[w] = 0;
            }
        }
        let mut in_first = vec![false; n];
        for &v in &first {
            in_first[v] = true;
        }
        if first.iter().any(|&v| in_first[mate(v)]) {
            return Err(PartitionError::InvariantViolated { level: i, which: "first set spans a matching edge" });
        }
        let second: Vec<VertexId> = first.iter().map(|&v| mate(v)).collect();
        let mut in_second = vec![false; n];
        for &v in &second {
            in_second[v] = true;
        }
        if second.iter().any(|&v| h.neighbors(v).iter().any(|&w| in_second[w])) {
            return Err(PartitionError::InvariantViolated { level: i, which: "second set is not independent" });
        }
        for &v in first.iter().chain(&second) {
            taken[v] = true;
        }
        let small = (first.len() as f64) < half;
        levels.push(Level { first, second });
        if small {
            break;
        }
        if i as f64 > half {
            return Err(PartitionError::InvariantViolated { level: i, which: "more than βn/2 levels" });
        }
    }
    let stop = levels.len() - 2;
    if stop == 0 {
        return Err(PartitionError::InvariantViolated { level: 1, which: "first level already below βn/2" });
    }
    let low = (alpha - beta) * n as f64;
    let mut b1_all = vec![false; n];
    for lvl in &levels[1..=stop] {
        for &v in &lvl.first {
            b1_all[v] = true;
        }
    }
    let mut level1 = vec![false; n];
    for &v in &levels[1].first {
        level1[v] = true;
    }
    let mut in_a = vec![false; n];
    for &v in &uncovered {
        if (count_into(h, v, &level1) as f64) < low {
            in_a[v] = true;
        }
    }
    for lvl in &levels[1..=stop] {
        for &v in &lvl.second {
            if (count_into(h, v, &b1_all) as f64) < low {
                in_a[v] = true;
                in_a[mate(v)] = true;
            }
        }
    }
    let mut part = vec![Part::C1; n];
    let mut placed = vec![false; n];
    for v in 0..n {
        if in_a[v] {
            part[v] = Part::A;
            placed[v] = true;
        }
    }
    for lvl in &levels[1..=stop] {
        for (&a, &b) in lvl.first.iter().zip(&lvl.second) {
            if !in_a[a] {
                part[a] = Part::B1;
                part[b] = Part::B2;
                placed[a] = true;
                placed[b] = true;
            }
        }
    }
    for &v in &uncovered {
        if !in_a[v] {
            part[v] = Part::R;
            placed[v] = true;
        }
    }
    let low_side = part.iter().map(|p| matches!(p, Part::B2 | Part::R)).collect::<Vec<_>>();
    // C₁ takes the stopping level, and otherwise the endpoint with more edges to B₂ ∪ R
    for &v in &levels[stop + 1].first {
        if !placed[v] {
            part[v] = Part::C1;
            part[mate(v)] = Part::C2;
            placed[v] = true;
            placed[mate(v)] = true;
        }
    }
    for v in 0..n {
        if placed[v] {
            continue;
        }
        let w = mate(v);
        let (cv, cw) = (count_into(h, v, &low_side), count_into(h, w, &low_side));
        let (c1, c2) = if cv > cw || (cv == cw && v < w) { (v, w) } else { (w, v) };
        part[c1] = Part::C1;
        part[c2] = Part::C2;
        placed[v] = true;
        placed[w] = true;
    }
    let frac = |p: Part| part.iter().filter(|&&q| q == p).count() as f64 / n as f64;
    Ok(Partition { gamma1: frac(Part::C1), gamma2: frac(Part::B1), part, alpha, beta, levels, stop })
}

/// Outcome of one partition property.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, ok: bool, detail: String) -> Self {
        Check { name: name.to_string(), ok, detail }
    }
}

/// Verifies the size, matching and degree properties of `p` literally.
pub fn check_partition_properties(h: &StaticGraph, m: &Matching, p: &Partition) -> Vec<Check> {
    let n = h.n() as f64;
    let (alpha, beta) = (p.alpha, p.beta);
    let a = p.size(Part::A);
    let r = p.size(Part::R);
    let mut out = Vec::new();
    let bound = 12.0 / (beta * beta);
    out.push(Check::new("H1", (a as f64) <= bound, format!("|A| = {a}, bound {bound:.1}")));
    let deficit = h.n() - m.covered();
    out.push(Check::new(
        "H2",
        deficit.saturating_sub(a) <= r && r <= deficit,
        format!("|R| = {r}, n - 2|M| = {deficit}, |A| = {a}"),
    ));
    let paired = |from: Part, to: Part| {
        p.members(from).iter().all(|&v| m.partner(v).is_some_and(|w| p.part(w) == to && h.has_edge(v, w)))
            && p.size(from) == p.size(to)
    };
    let b1 = p.mask(&[Part::B1]);
    let need = (alpha - 2.0 * beta) * n;
    let worst_b = (0..h.n())
        .filter(|&v| p.is(v, &[Part::B2, Part::R]))
        .map(|v| count_into(h, v, &b1))
        .min()
        .unwrap_or(usize::MAX);
    out.push(Check::new(
        "H3",
        paired(Part::B1, Part::B2) && paired(Part::B2, Part::B1) && (worst_b as f64) >= need - 1e-9,
        format!("min e(v, B1) over B2 ∪ R = {worst_b}, need {need:.1}"),
    ));
    let low = p.mask(&[Part::B2, Part::R]);
    let cap = 1.0 / beta + 1.0;
    let worst_c = p.members(Part::C2).iter().map(|&v| count_into(h, v, &low)).max().unwrap_or(0);
    out.push(Check::new(
        "H4",
        paired(Part::C1, Part::C2) && paired(Part::C2, Part::C1) && worst_c as f64 <= cap + 1e-9,
        format!("max e(v, B2 ∪ R) over C2 = {worst_c}, cap {cap:.2}"),
    ));
    let stop_ok = p.stop as f64 <= 1.0 / beta + 1e-9;
    out.push(Check::new("stop", stop_ok, format!("stopping level {} vs 1/beta = {:.2}", p.stop, 1.0 / beta)));
    out
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.ok)
}
