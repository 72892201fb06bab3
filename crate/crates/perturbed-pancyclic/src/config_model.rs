//! Configuration-model sampling of random 1- and 2-regular graphs.
//!
//! A configuration is a perfect matching on the `n·d` points `(owner, slot)`.
//! Sampling reveals the matching one pair per step: a pivot point is chosen by
//! a [`PivotRule`], and its partner uniformly among the remaining points.

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Multigraph, StaticGraph, VertexId};

/// Default number of configurations tried by [`sample_simple_regular`].
pub const DEFAULT_MAX_ATTEMPTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub owner: VertexId,
    pub slot: usize,
}

impl Point {
    pub fn new(owner: VertexId, slot: usize) -> Self {
        Point { owner, slot }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.owner, self.slot)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("n·d = {n}·{d} is odd")]
    ParityError { n: usize, d: usize },
    #[error("degree {0} unsupported; only 1 and 2")]
    UnsupportedDegree(usize),
    #[error("forced pairs conflict at point {0}")]
    ConflictingPairs(Point),
    #[error("point {0} out of range")]
    BadPoint(Point),
    #[error("no simple graph after {0} attempts")]
    AttemptsExhausted(usize),
    #[error("pair {0}-{1} not in configuration")]
    NotInConfiguration(Point, Point),
    #[error("switch pairs share point {0}")]
    SharedPoint(Point),
}

/// Deterministic per-trial generator: ChaCha8 keyed by `seed`, with the trial
/// index selecting the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Perfect matching on the `n·d` points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    n: usize,
    d: usize,
    partner: Vec<usize>,
}

impl Configuration {
    /// Builds a configuration from explicit pairs covering every point once.
    pub fn from_pairs(n: usize, d: usize, pairs: &[(Point, Point)]) -> Result<Self, ConfigError> {
        check_params(n, d)?;
        let mut partner = vec![usize::MAX; n * d];
        for &(p, q) in pairs {
            let (a, b) = (index(n, d, p)?, index(n, d, q)?);
            if a == b || partner[a] != usize::MAX {
                return Err(ConfigError::ConflictingPairs(p));
            }
            if partner[b] != usize::MAX {
                return Err(ConfigError::ConflictingPairs(q));
            }
            partner[a] = b;
            partner[b] = a;
        }
        if let Some(i) = partner.iter().position(|&x| x == usize::MAX) {
            return Err(ConfigError::ConflictingPairs(Point::new(i / d, i % d)));
        }
        Ok(Configuration { n, d, partner })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn point(&self, i: usize) -> Point {
        Point::new(i / self.d, i % self.d)
    }

    pub fn partner(&self, p: Point) -> Point {
        self.point(self.partner[p.owner * self.d + p.slot])
    }

    pub fn contains(&self, p: Point, q: Point) -> bool {
        index(self.n, self.d, p).is_ok() && index(self.n, self.d, q).is_ok() && self.partner(p) == q
    }

    /// Pairs with the smaller point first, sorted.
    pub fn pairs(&self) -> Vec<(Point, Point)> {
        (0..self.partner.len())
            .filter(|&i| i < self.partner[i])
            .map(|i| (self.point(i), self.point(self.partner[i])))
            .collect()
    }

    /// The multigraph `G(M)`: one edge per pair, loops when owners coincide.
    pub fn project(&self) -> Multigraph {
        let mut g = Multigraph::new(self.n);
        for (p, q) in self.pairs() {
            g.add_edge(p.owner, q.owner);
        }
        g
    }

    /// One `owner.slot owner.slot` line per pair.
    pub fn dump(&self) -> String {
        self.pairs().iter().map(|(p, q)| format!("{p} {q}\n")).collect()
    }

    /// Replaces `u1u2, v1v2` by `u1v1, u2v2` (or `u1v2, u2v1` when crossing).
    ///
    /// Switching the result back along `(u1, v1), (u2, v2)` (resp.
    /// `(u1, v2), (u2, v1)`) without crossing restores the original.
    pub fn switch(&self, pair1: (Point, Point), pair2: (Point, Point), crossing: bool) -> Result<Self, ConfigError> {
        let ((u1, u2), (v1, v2)) = (pair1, pair2);
        for (a, b) in [pair1, pair2] {
            if !self.contains(a, b) {
                return Err(ConfigError::NotInConfiguration(a, b));
            }
        }
        for p in [u1, u2] {
            if p == v1 || p == v2 {
                return Err(ConfigError::SharedPoint(p));
            }
        }
        let (a, b) = if crossing { (v2, v1) } else { (v1, v2) };
        let mut out = self.clone();
        let idx = |p: Point| p.owner * self.d + p.slot;
        for (x, y) in [(u1, a), (u2, b)] {
            out.partner[idx(x)] = idx(y);
            out.partner[idx(y)] = idx(x);
        }
        Ok(out)
    }
}

fn check_params(n: usize, d: usize) -> Result<(), ConfigError> {
    if !(1..=2).contains(&d) {
        return Err(ConfigError::UnsupportedDegree(d));
    }
    if n * d % 2 == 1 {
        return Err(ConfigError::ParityError { n, d });
    }
    Ok(())
}

fn index(n: usize, d: usize, p: Point) -> Result<usize, ConfigError> {
    if p.owner >= n || p.slot >= d {
        return Err(ConfigError::BadPoint(p));
    }
    Ok(p.owner * d + p.slot)
}

/// State visible to a pivot rule at the start of a step.
pub struct RevealView<'a> {
    pub n: usize,
    pub d: usize,
    covered: &'a [bool],
    uncovered: &'a [usize],
    /// Partner chosen at the previous step.
    pub previous: Option<Point>,
}

impl RevealView<'_> {
    pub fn is_covered(&self, p: Point) -> bool {
        self.covered[p.owner * self.d + p.slot]
    }

    pub fn uncovered_count(&self) -> usize {
        self.uncovered.len()
    }

    /// Covered points among the extended set of `v`.
    pub fn covered_at(&self, v: VertexId) -> usize {
        (0..self.d).filter(|&s| self.covered[v * self.d + s]).count()
    }

    /// An uncovered point of `v`, if any.
    pub fn free_slot(&self, v: VertexId) -> Option<Point> {
        (0..self.d).map(|s| Point::new(v, s)).find(|&p| !self.is_covered(p))
    }
}

/// Chooses the pivot `x_i` of each step. Must return an uncovered point.
pub trait PivotRule {
    fn pivot(&mut self, view: &RevealView<'_>) -> Point;
}

/// Lowest-index uncovered point.
#[derive(Default)]
pub struct LowestIndex {
    cursor: usize,
}

impl PivotRule for LowestIndex {
    fn pivot(&mut self, view: &RevealView<'_>) -> Point {
        while view.covered[self.cursor] {
            self.cursor += 1;
        }
        Point::new(self.cursor / view.d, self.cursor % view.d)
    }
}

/// Continue from the vertex just reached while it still has a free point,
/// so each component is revealed completely before the next one starts.
#[derive(Default)]
pub struct FinishComponentFirst {
    fallback: LowestIndex,
}

impl PivotRule for FinishComponentFirst {
    fn pivot(&mut self, view: &RevealView<'_>) -> Point {
        if let Some(y) = view.previous {
            if let Some(p) = view.free_slot(y.owner) {
                return p;
            }
        }
        self.fallback.pivot(view)
    }
}

/// For a 2-factor conditioned on slot-0 pairs `j–σ(j)`: after reaching `j`,
/// continue from the free point of `σ(j)`.
pub struct PartnerOfPrevious {
    sigma: Vec<VertexId>,
    fallback: LowestIndex,
}

impl PartnerOfPrevious {
    pub fn new(sigma: Vec<VertexId>) -> Self {
        PartnerOfPrevious { sigma, fallback: LowestIndex::default() }
    }
}

impl PivotRule for PartnerOfPrevious {
    fn pivot(&mut self, view: &RevealView<'_>) -> Point {
        if let Some(y) = view.previous {
            let s = self.sigma[y.owner];
            if view.covered_at(s) == 1 {
                if let Some(p) = view.free_slot(s) {
                    return p;
                }
            }
        }
        self.fallback.pivot(view)
    }
}

/// One revealed pair `(x_i, y_i)`.
#[derive(Clone, Copy, Debug)]
pub struct RevealStep {
    pub pivot: Point,
    pub partner: Point,
    /// Points of the partner's owner covered just before `partner` was chosen.
    pub partner_owner_covered: usize,
}

/// Runs the stepwise process, starting after `forced` pairs, and reports each
/// revealed step to `observe`.
pub fn reveal<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    forced: &[(Point, Point)],
    rng: &mut R,
    rule: &mut dyn PivotRule,
    mut observe: impl FnMut(&RevealStep),
) -> Result<Configuration, ConfigError> {
    reveal_observed(n, d, forced, rng, rule, |step, _| observe(step))
}

/// Like [`reveal`], also exposing the coverage state after each step.
pub fn reveal_observed<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    forced: &[(Point, Point)],
    rng: &mut R,
    rule: &mut dyn PivotRule,
    mut observe: impl FnMut(&RevealStep, &RevealView<'_>),
) -> Result<Configuration, ConfigError> {
    check_params(n, d)?;
    let total = n * d;
    let mut partner = vec![usize::MAX; total];
    let mut covered = vec![false; total];
    for &(p, q) in forced {
        let (a, b) = (index(n, d, p)?, index(n, d, q)?);
        if a == b || covered[a] {
            return Err(ConfigError::ConflictingPairs(p));
        }
        if covered[b] {
            return Err(ConfigError::ConflictingPairs(q));
        }
        covered[a] = true;
        covered[b] = true;
        partner[a] = b;
        partner[b] = a;
    }
    let mut uncovered: Vec<usize> = (0..total).filter(|&i| !covered[i]).collect();
    let mut slot_of = vec![usize::MAX; total];
    for (k, &i) in uncovered.iter().enumerate() {
        slot_of[i] = k;
    }
    let take = |i: usize, uncovered: &mut Vec<usize>, slot_of: &mut Vec<usize>| {
        let k = slot_of[i];
        let last = *uncovered.last().unwrap();
        uncovered.swap_remove(k);
        if last != i {
            slot_of[last] = k;
        }
        slot_of[i] = usize::MAX;
    };
    let mut previous = None;
    while !uncovered.is_empty() {
        let x = {
            let view = RevealView { n, d, covered: &covered, uncovered: &uncovered, previous };
            rule.pivot(&view)
        };
        let xi = index(n, d, x)?;
        assert!(!covered[xi], "pivot rule returned a covered point");
        covered[xi] = true;
        take(xi, &mut uncovered, &mut slot_of);
        let yi = uncovered[rng.random_range(0..uncovered.len())];
        let y = Point::new(yi / d, yi % d);
        let partner_owner_covered = (0..d).filter(|&s| covered[y.owner * d + s]).count();
        covered[yi] = true;
        take(yi, &mut uncovered, &mut slot_of);
        partner[xi] = yi;
        partner[yi] = xi;
        previous = Some(y);
        let view = RevealView { n, d, covered: &covered, uncovered: &uncovered, previous };
        observe(&RevealStep { pivot: x, partner: y, partner_owner_covered }, &view);
    }
    Ok(Configuration { n, d, partner })
}

/// Uniform configuration with the default lowest-index pivot.
pub fn sample_configuration<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Configuration, ConfigError> {
    reveal(n, d, &[], rng, &mut LowestIndex::default(), |_| {})
}

/// Uniform configuration with a caller-chosen pivot rule.
pub fn sample_configuration_with<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    rule: &mut dyn PivotRule,
) -> Result<Configuration, ConfigError> {
    reveal(n, d, &[], rng, rule, |_| {})
}

/// Uniform over configurations containing every pair of `forced`.
pub fn sample_conditioned<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    forced: &[(Point, Point)],
    rng: &mut R,
) -> Result<Configuration, ConfigError> {
    reveal(n, d, forced, rng, &mut LowestIndex::default(), |_| {})
}

/// Rejection sampling: configurations are drawn until the projection is simple.
pub fn sample_simple_regular<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<StaticGraph, ConfigError> {
    check_params(n, d)?;
    for _ in 0..max_attempts {
        if let Some(g) = sample_configuration(n, d, rng)?.project().to_simple() {
            return Ok(g);
        }
    }
    Err(ConfigError::AttemptsExhausted(max_attempts))
}

/// Uniform random perfect matching on `n` vertices (n even) as a partner map.
pub fn random_perfect_matching<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<VertexId>, ConfigError> {
    let cfg = sample_configuration(n, 1, rng)?;
    Ok((0..n).map(|v| cfg.partner(Point::new(v, 0)).owner).collect())
}

/// Samples `G ~ C_{n,2}` revealing one component at a time; returns the
/// configuration and the number of components finished along the way.
pub fn reveal_two_factor_components<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(Configuration, usize), ConfigError> {
    let mut finished = 0;
    let cfg = reveal(n, 2, &[], rng, &mut FinishComponentFirst::default(), |step| {
        // the partner's owner had its other point covered: the open end closes
        if step.partner_owner_covered == 1 {
            finished += 1;
        }
    })?;
    Ok((cfg, finished))
}

/// Samples a 2-configuration conditioned on slot-0 pairs `{j, σ(j)}` of the
/// perfect matching `sigma`; the slot-1 pairs form a uniform perfect matching.
/// Returns the configuration and the number of components finished along the way.
pub fn reveal_matching_union_components<R: Rng + ?Sized>(
    sigma: &[VertexId],
    rng: &mut R,
) -> Result<(Configuration, usize), ConfigError> {
    let n = sigma.len();
    let forced: Vec<(Point, Point)> =
        (0..n).filter(|&j| j < sigma[j]).map(|j| (Point::new(j, 0), Point::new(sigma[j], 0))).collect();
    let mut finished = 0;
    let mut rule = PartnerOfPrevious::new(sigma.to_vec());
    let cfg = reveal_observed(n, 2, &forced, rng, &mut rule, |step, view| {
        // the partner's σ-mate is already fully covered: nothing is left open
        if view.covered_at(sigma[step.partner.owner]) == 2 {
            finished += 1;
        }
    })?;
    Ok((cfg, finished))
}
