//! Cycles of every length in `H ∪ G` for a 2-factor `G`, or a perfect matching
//! `G` together with an almost perfect matching of `H`.
//!
//! The run has three phases. [`build_absorber`] sets aside reserve vertices
//! `U` and threads an absorbing path `P` whose edges `e_j` each span a
//! triangle with `u_j`. [`merge_to_cycle`] repeatedly splices the
//! path/cycle system with available edges until it is one cycle on
//! `V ∖ U` containing `P`. [`extract_cycle`] then cuts or extends that cycle
//! to any requested length.

use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{edge, ComponentView, Edge, PathCycleSystem, SpliceDelta, VertexId};
use crate::ledger::{log_sq, BoundExceeded, Ledger, Selection, Strictness};
use crate::perturb::PerturbedInstance;
use crate::verify::{validate_cycle, CycleCertificate};

/// Slack added to the merge step budget.
pub const BUDGET_SLACK: usize = 64;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AbsorbError {
    #[error("no available edge for absorber {j} ({stage})")]
    AbsorberExhausted { j: usize, stage: &'static str },
    #[error("no available edge in case {0}")]
    AvailabilityExhausted(&'static str),
    #[error("merge exceeded {budget} steps")]
    BudgetExceeded { steps: usize, budget: usize },
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("k = {k} ({regime}): {reason}")]
    ExtractionFailed { k: usize, regime: &'static str, reason: String },
    #[error(transparent)]
    Bound(#[from] BoundExceeded),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorbConfig {
    pub selection: Selection,
    pub strictness: Strictness,
    /// Overrides the number of reserve vertices.
    pub absorbers: Option<usize>,
}

impl Default for AbsorbConfig {
    fn default() -> Self {
        AbsorbConfig { selection: Selection::Random, strictness: Strictness::Experiment, absorbers: None }
    }
}

/// `max(2, ⌊α²n/1000⌋)`.
pub fn absorber_count(n: usize, alpha: f64) -> usize {
    ((alpha * alpha * n as f64 / 1000.0).floor() as usize).max(2)
}

/// Reserve vertices and the path that can absorb them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorbingPath {
    pub reserve: Vec<VertexId>,
    /// `e_j = (z_j, z_j')`, a `G`-edge inside `N_H(u_j)`.
    pub absorbing: Vec<(VertexId, VertexId)>,
    /// `f_j = (w_j, w_j')` joining `e_j` to `e_{j+1}`.
    pub connectors: Vec<(VertexId, VertexId)>,
    /// `z_1 z_1' w_1 w_1' z_2 … z_m z_m'`.
    pub vertices: Vec<VertexId>,
}

impl AbsorbingPath {
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.vertices.windows(2).map(|w| edge(w[0], w[1]))
    }

    /// Checks the triangle and disjointness properties against `inst`.
    pub fn audit(&self, inst: &PerturbedInstance) -> Result<(), String> {
        let m = self.reserve.len();
        if self.absorbing.len() != m || self.connectors.len() + 1 != m {
            return Err("size mismatch".into());
        }
        for (j, (&u, &(z, zp))) in self.reserve.iter().zip(&self.absorbing).enumerate() {
            if !(inst.h_adjacent(u, z) && inst.h_adjacent(u, zp) && inst.g_adjacent(z, zp)) {
                return Err(format!("absorber {j} does not span a triangle"));
            }
        }
        for &(w, wp) in &self.connectors {
            if !inst.g_adjacent(w, wp) {
                return Err(format!("connector {w}-{wp} is not a G-edge"));
            }
        }
        let mut seen = HashSet::new();
        for &v in self.vertices.iter().chain(&self.reserve) {
            if !seen.insert(v) {
                return Err(format!("vertex {v} repeated"));
            }
        }
        if self.vertices.len() != 4 * m - 2 {
            return Err("path length".into());
        }
        for w in self.vertices.windows(2) {
            if !inst.host_adjacent(w[0], w[1]) {
                return Err(format!("{}-{} not an edge of H ∪ G", w[0], w[1]));
            }
        }
        Ok(())
    }
}

pub(crate) fn pick<T: Copy, R: Rng + ?Sized>(cands: &[T], selection: Selection, rng: &mut R) -> Option<T> {
    match selection {
        Selection::LowestIndex => cands.first().copied(),
        Selection::Random => (!cands.is_empty()).then(|| cands[rng.random_range(0..cands.len())]),
    }
}

pub(crate) fn order<T, R: Rng + ?Sized>(cands: &mut [T], selection: Selection, rng: &mut R) {
    if selection == Selection::Random {
        cands.shuffle(rng);
    }
}

/// Validates a matching of `H` for the matching-augmented mode and returns it
/// with both endpoints normalized.
fn check_matching(inst: &PerturbedInstance, matching: &[Edge], ledger: &mut Ledger) -> Result<Vec<Edge>, AbsorbError> {
    let n = inst.n();
    let mut covered = vec![false; n];
    for &(a, b) in matching {
        if a >= n || b >= n || !inst.h_adjacent(a, b) {
            return Err(AbsorbError::Precondition(format!("{a}-{b} is not an edge of H")));
        }
        for v in [a, b] {
            if std::mem::replace(&mut covered[v], true) {
                return Err(AbsorbError::Precondition(format!("matching covers {v} twice")));
            }
        }
    }
    let alpha = inst.alpha();
    let deficit = n - 2 * matching.len();
    let allowed = (alpha * alpha * n as f64 / 100.0).floor();
    if ledger.strictness == Strictness::Strict && deficit as f64 > allowed {
        return Err(AbsorbError::Precondition(format!("matching leaves {deficit} vertices exposed, allowed {allowed}")));
    }
    ledger.check("matching deficit", deficit as f64, allowed)?;
    Ok(matching.iter().map(|&(a, b)| edge(a, b)).collect())
}

/// Builds `U`, `P` and the starting system `G_0` (with `U` deactivated).
///
/// With `matching`, `G_0` starts from `M ∪ G` instead of `G`.
pub fn build_absorber<R: Rng + ?Sized>(
    inst: &PerturbedInstance,
    matching: Option<&[Edge]>,
    cfg: &AbsorbConfig,
    ledger: &mut Ledger,
    rng: &mut R,
) -> Result<(AbsorbingPath, PathCycleSystem), AbsorbError> {
    let n = inst.n();
    let alpha = inst.alpha();
    let m = cfg.absorbers.unwrap_or_else(|| absorber_count(n, alpha));
    if m < 2 {
        return Err(AbsorbError::Precondition("need at least 2 absorbers".into()));
    }
    if 5 * m > n {
        return Err(AbsorbError::Precondition(format!("{m} absorbers do not fit in {n} vertices")));
    }
    let matching = matching.map(|mm| check_matching(inst, mm, ledger)).transpose()?;

    let reserve: Vec<VertexId> = match cfg.selection {
        Selection::LowestIndex => (0..m).collect(),
        Selection::Random => index::sample(rng, n, m).into_vec(),
    };
    let mut blocked = vec![false; n];
    for &u in &reserve {
        blocked[u] = true;
    }

    let g_edges_between = |x: VertexId, y: VertexId, blocked: &[bool]| -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for &z in inst.h().neighbors(x) {
            if blocked[z] {
                continue;
            }
            for &zp in inst.g().neighbors(z) {
                if !blocked[zp] && inst.h_adjacent(y, zp) {
                    out.push((z, zp));
                }
            }
        }
        out
    };

    let mut absorbing = Vec::with_capacity(m);
    for (j, &u) in reserve.iter().enumerate() {
        let cands = g_edges_between(u, u, &blocked);
        let (z, zp) = pick(&cands, cfg.selection, rng).ok_or(AbsorbError::AbsorberExhausted { j, stage: "absorbing edge" })?;
        blocked[z] = true;
        blocked[zp] = true;
        absorbing.push((z, zp));
    }
    let mut connectors = Vec::with_capacity(m - 1);
    for j in 0..m - 1 {
        let cands = g_edges_between(absorbing[j].1, absorbing[j + 1].0, &blocked);
        let (w, wp) = pick(&cands, cfg.selection, rng).ok_or(AbsorbError::AbsorberExhausted { j, stage: "connector" })?;
        blocked[w] = true;
        blocked[wp] = true;
        connectors.push((w, wp));
    }
    let mut vertices = Vec::with_capacity(4 * m - 2);
    for j in 0..m {
        vertices.extend([absorbing[j].0, absorbing[j].1]);
        if j + 1 < m {
            vertices.extend([connectors[j].0, connectors[j].1]);
        }
    }
    let path = AbsorbingPath { reserve, absorbing, connectors, vertices };

    // G_0 = ((M ∪) G − (W' ∪ U)) ∪ P
    let mut removed = vec![false; n];
    for &v in &path.vertices[1..path.vertices.len() - 1] {
        removed[v] = true;
    }
    for &u in &path.reserve {
        removed[u] = true;
    }
    let mut base: HashSet<Edge> = inst.g().edges().collect();
    if let Some(mm) = &matching {
        base.extend(mm.iter().copied());
    }
    let mut base: Vec<Edge> = base.into_iter().filter(|&(a, b)| !removed[a] && !removed[b]).collect();
    base.sort_unstable();
    let mut sys = PathCycleSystem::new(n);
    for (a, b) in base.into_iter().chain(path.edges()) {
        sys.insert_edge(a, b).map_err(|e| AbsorbError::Precondition(format!("G_0 is not a path/cycle system: {e}")))?;
    }
    for &u in &path.reserve {
        sys.deactivate(u).expect("reserve vertices are isolated in G_0");
    }
    let bound = log_sq(n) + (alpha * alpha * n as f64 / 200.0).ceil() + BUDGET_SLACK as f64;
    ledger.check("G_0 components", sys.component_count() as f64, bound)?;
    Ok((path, sys))
}

/// Which rule produced a merge step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeCase {
    #[serde(rename = "1")]
    PathsToOne,
    #[serde(rename = "2.1")]
    ExtendPath,
    #[serde(rename = "2.2")]
    CloseReversed,
    #[serde(rename = "2.3.1")]
    CloseAdjacent,
    #[serde(rename = "2.3.2")]
    CloseThroughDetour,
    #[serde(rename = "3.1")]
    JoinCycles,
    #[serde(rename = "3.2")]
    OpenCycles,
}

impl MergeCase {
    pub fn tag(self) -> &'static str {
        match self {
            MergeCase::PathsToOne => "1",
            MergeCase::ExtendPath => "2.1",
            MergeCase::CloseReversed => "2.2",
            MergeCase::CloseAdjacent => "2.3.1",
            MergeCase::CloseThroughDetour => "2.3.2",
            MergeCase::JoinCycles => "3.1",
            MergeCase::OpenCycles => "3.2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub case: MergeCase,
    pub paths_before: usize,
    pub components_before: usize,
    pub paths_after: usize,
    pub components_after: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MergeTrace {
    pub steps: Vec<MergeStep>,
    pub budget: usize,
}

impl MergeTrace {
    pub fn count(&self, case: MergeCase) -> usize {
        self.steps.iter().filter(|s| s.case == case).count()
    }
}

struct Merger<'a, R: Rng + ?Sized> {
    inst: &'a PerturbedInstance,
    sys: &'a mut PathCycleSystem,
    in_p: Vec<bool>,
    in_u: Vec<bool>,
    p_edges: HashSet<Edge>,
    unavailable: HashSet<Edge>,
    selection: Selection,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> Merger<'_, R> {
    /// `Z(x, y)`: oriented available edges off `P ∪ U`.
    fn z(&mut self, x: VertexId, y: VertexId) -> Vec<(VertexId, VertexId)> {
        let (in_p, in_u) = (&self.in_p, &self.in_u);
        let mut out = self.inst.available_edges(x, y, &|v| in_p[v] || in_u[v], self.sys, &self.unavailable);
        order(&mut out, self.selection, self.rng);
        out
    }

    /// Applies the splice if `accept` approves the result; removed edges
    /// become unavailable only on success.
    fn attempt(&mut self, remove: &[Edge], add: &[Edge], accept: impl Fn(&SpliceDelta, &PathCycleSystem) -> bool) -> bool {
        assert!(remove.len() <= 3, "a step removes at most 3 edges");
        debug_assert!(remove.iter().all(|&(a, b)| !self.p_edges.contains(&edge(a, b))), "step removes an edge of P");
        match self.sys.splice(remove, add) {
            Ok(delta) if accept(&delta, self.sys) => {
                self.unavailable.extend(remove.iter().map(|&(a, b)| edge(a, b)));
                true
            }
            Ok(_) => {
                self.sys.undo(remove, add);
                false
            }
            Err(_) => false,
        }
    }

    fn adjacent_or_equal(&self, a: VertexId, b: VertexId) -> bool {
        a == b || self.sys.has_edge(a, b)
    }

    fn case1(&mut self, mut paths: Vec<ComponentView>) -> Result<MergeCase, AbsorbError> {
        order(&mut paths, self.selection, self.rng);
        for p in paths {
            let (x, y) = p.ends.expect("path");
            for (z, zp) in self.z(x, y) {
                if [x, y].iter().any(|&t| self.adjacent_or_equal(t, z) || self.adjacent_or_equal(t, zp)) {
                    continue;
                }
                if self.attempt(&[(z, zp)], &[(x, z), (y, zp)], |d, _| d.paths == -1 && d.components() <= 1) {
                    return Ok(MergeCase::PathsToOne);
                }
            }
        }
        Err(AbsorbError::AvailabilityExhausted("1"))
    }

    fn dist_from(&self, x: VertexId, v: VertexId) -> i64 {
        (self.sys.position(v) - self.sys.position(x)).abs()
    }

    /// Neighbour of `v` on the path one step further from `x`.
    fn step_away(&self, x: VertexId, v: VertexId) -> Option<VertexId> {
        let d = self.dist_from(x, v);
        self.sys.neighbors(v).find(|&w| self.dist_from(x, w) == d + 1)
    }

    fn step_toward(&self, x: VertexId, v: VertexId) -> Option<VertexId> {
        let d = self.dist_from(x, v);
        self.sys.neighbors(v).find(|&w| self.dist_from(x, w) == d - 1)
    }

    fn case2(&mut self, p: ComponentView) -> Result<MergeCase, AbsorbError> {
        let (x, y) = p.ends.expect("path");
        // 2.1: a neighbour of an end lies in a cycle off P
        let mut ext = Vec::new();
        for anchor in if x == y { vec![x] } else { vec![x, y] } {
            for &z in self.inst.h().neighbors(anchor) {
                if self.sys.is_active(z) && !self.in_p[z] && !self.sys.same_component(z, x) {
                    for zp in self.sys.neighbors(z) {
                        ext.push((anchor, z, zp));
                    }
                }
            }
        }
        if !ext.is_empty() {
            order(&mut ext, self.selection, self.rng);
            for (anchor, z, zp) in ext {
                if self.attempt(&[(z, zp)], &[(anchor, z)], |d, _| d.components() == -1) {
                    return Ok(MergeCase::ExtendPath);
                }
            }
            return Err(AbsorbError::AvailabilityExhausted("2.1"));
        }
        let zs: Vec<_> = self.z(x, y).into_iter().filter(|&(z, zp)| self.sys.same_component(z, x) && self.sys.same_component(zp, x)).collect();
        // 2.2: an available edge pointing back towards x
        for &(z, zp) in &zs {
            if self.dist_from(x, zp) < self.dist_from(x, z)
                && self.attempt(&[(z, zp)], &[(x, z), (y, zp)], |_, s| s.path_count() == 0)
            {
                return Ok(MergeCase::CloseReversed);
            }
        }
        // 2.3: all available edges point away from x
        let mut forward: Vec<_> = zs.into_iter().filter(|&(z, zp)| self.dist_from(x, z) < self.dist_from(x, zp)).collect();
        forward.sort_by_key(|&(z, _)| (self.dist_from(x, z), z));
        let mut disjoint: Vec<(VertexId, VertexId)> = Vec::new();
        for (z, zp) in forward {
            if disjoint.last().is_none_or(|&(_, lp)| lp != z) {
                disjoint.push((z, zp));
            }
        }
        let mut pairs: Vec<(usize, usize)> = (1..disjoint.len()).map(|i| (i - 1, i)).collect();
        pairs.sort_by_key(|&(a, b)| {
            let (z, w) = (disjoint[a].0, disjoint[b].0);
            (self.dist_from(z, w), self.dist_from(x, z), z)
        });
        for (a, b) in pairs {
            let ((z, zp), (w, _)) = (disjoint[a], disjoint[b]);
            let _ = z;
            if self.dist_from(zp, w) == 1 {
                if self.attempt(&[(zp, w)], &[(x, w), (y, zp)], |_, s| s.path_count() == 0) {
                    return Ok(MergeCase::CloseAdjacent);
                }
                continue;
            }
            let (Some(zpp), Some(wpp)) = (self.step_away(x, zp), self.step_toward(x, w)) else { continue };
            let (lo, hi) = (self.dist_from(x, zpp), self.dist_from(x, wpp));
            for (z3, w3) in self.z(zpp, wpp) {
                let inside = |v: VertexId, me: &Self| me.sys.same_component(v, x) && (lo..=hi).contains(&me.dist_from(x, v));
                if inside(z3, self) || inside(w3, self) {
                    continue;
                }
                let remove = [(zp, zpp), (w, wpp), (z3, w3)];
                let add = [(x, w), (y, zp), (zpp, z3), (wpp, w3)];
                if self.attempt(&remove, &add, |d, s| s.path_count() == 0 && d.components() <= 0) {
                    return Ok(MergeCase::CloseThroughDetour);
                }
            }
        }
        Err(AbsorbError::AvailabilityExhausted("2.3"))
    }

    fn case3(&mut self, cycles: Vec<ComponentView>) -> Result<MergeCase, AbsorbError> {
        // 3.1: an edge whose available set leaves its own cycle
        let mut edges: Vec<Edge> = self.sys.edges().filter(|e| !self.p_edges.contains(e)).collect();
        order(&mut edges, self.selection, self.rng);
        for (a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                for (z, zp) in self.z(x, y) {
                    if self.sys.same_component(z, x) {
                        continue;
                    }
                    if self.attempt(&[(x, y), (z, zp)], &[(x, z), (y, zp)], |d, s| d.components() == -1 && s.path_count() == 0) {
                        return Ok(MergeCase::JoinCycles);
                    }
                }
            }
        }
        // 3.2: open two cycles into one path
        let reps: Vec<Vec<VertexId>> = cycles
            .iter()
            .map(|c| {
                let any = self.sys.component_vertices(self.sys.representative(c.id));
                any.into_iter().filter(|&v| !self.in_p[v]).collect()
            })
            .collect();
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                let mut xs = reps[i].clone();
                let mut ys = reps[j].clone();
                order(&mut xs, self.selection, self.rng);
                order(&mut ys, self.selection, self.rng);
                for (&x, &y) in xs.iter().zip(ys.iter()).take(16) {
                    for (z, zp) in self.z(x, y) {
                        let (anchor, target) = if !self.sys.same_component(z, x) { (x, z) } else { (y, zp) };
                        if self.sys.same_component(target, anchor) {
                            continue;
                        }
                        let w = self.sys.neighbors(anchor).next().expect("cycle vertex has neighbours");
                        if self.attempt(&[(w, anchor), (z, zp)], &[(anchor, target)], |d, s| d.components() == -1 && s.path_count() == 1) {
                            return Ok(MergeCase::OpenCycles);
                        }
                    }
                }
            }
        }
        Err(AbsorbError::AvailabilityExhausted("3.2"))
    }
}

/// Stepwise driver of the merge; each [`Merge::step`] applies one case.
pub struct Merge<'a, R: Rng + ?Sized> {
    inner: Merger<'a, R>,
    n_active: usize,
}

impl<'a, R: Rng + ?Sized> Merge<'a, R> {
    pub fn new(
        inst: &'a PerturbedInstance,
        path: &AbsorbingPath,
        sys: &'a mut PathCycleSystem,
        selection: Selection,
        rng: &'a mut R,
    ) -> Self {
        let n = inst.n();
        let mut in_p = vec![false; n];
        let mut in_u = vec![false; n];
        for &v in &path.vertices {
            in_p[v] = true;
        }
        for &u in &path.reserve {
            in_u[u] = true;
        }
        let p_edges: HashSet<Edge> = path.edges().collect();
        let inner = Merger { inst, sys, in_p, in_u, p_edges, unavailable: HashSet::new(), selection, rng };
        Merge { inner, n_active: n - path.reserve.len() }
    }

    pub fn system(&self) -> &PathCycleSystem {
        self.inner.sys
    }

    /// Edges removed so far.
    pub fn unavailable(&self) -> &HashSet<Edge> {
        &self.inner.unavailable
    }

    pub fn is_done(&self) -> bool {
        let s = &*self.inner.sys;
        s.component_count() == 1 && s.cycle_count() == 1
    }

    /// Applies one case; `None` once the system is a single cycle.
    pub fn step(&mut self) -> Result<Option<MergeStep>, AbsorbError> {
        if self.is_done() {
            return Ok(None);
        }
        let m = &mut self.inner;
        let comps = m.sys.components();
        let (paths, cycles): (Vec<_>, Vec<_>) = comps.iter().partition(|c| c.kind.is_path());
        let (pb, cb) = (paths.len(), comps.len());
        let case = match paths.len() {
            0 => m.case3(cycles)?,
            1 => m.case2(paths[0])?,
            _ => m.case1(paths)?,
        };
        debug_assert!(m.p_edges.iter().all(|&(a, b)| m.sys.has_edge(a, b)), "P left the system");
        Ok(Some(MergeStep {
            case,
            paths_before: pb,
            components_before: cb,
            paths_after: m.sys.path_count(),
            components_after: m.sys.component_count(),
        }))
    }
}

/// Merges the system into a single cycle on `V ∖ U` containing `P`.
pub fn merge_to_cycle<R: Rng + ?Sized>(
    inst: &PerturbedInstance,
    path: &AbsorbingPath,
    sys: &mut PathCycleSystem,
    cfg: &AbsorbConfig,
    ledger: &mut Ledger,
    rng: &mut R,
) -> Result<MergeTrace, AbsorbError> {
    let n = inst.n();
    let alpha = inst.alpha();
    let budget = (alpha * alpha * n as f64 / 40.0).ceil() as usize + BUDGET_SLACK;
    let hard_cap = 4 * n + 4 * BUDGET_SLACK;
    let mut trace = MergeTrace { steps: Vec::new(), budget };
    let mut merge = Merge::new(inst, path, sys, cfg.selection, rng);
    while let Some(step) = merge.step()? {
        trace.steps.push(step);
        if trace.steps.len() >= hard_cap {
            return Err(AbsorbError::BudgetExceeded { steps: trace.steps.len(), budget });
        }
    }
    if merge.system().active_count() != merge.n_active {
        return Err(AbsorbError::Precondition("final cycle does not span V ∖ U".into()));
    }
    if trace.steps.len() > budget && cfg.strictness == Strictness::Strict {
        return Err(AbsorbError::BudgetExceeded { steps: trace.steps.len(), budget });
    }
    ledger.check("merge steps", trace.steps.len() as f64, budget as f64)?;
    // every two consecutive case-2/3 steps lower the component count
    let late: Vec<&MergeStep> = trace.steps.iter().filter(|s| s.case != MergeCase::PathsToOne).collect();
    let stalls = late.windows(2).filter(|w| w[1].components_after >= w[0].components_before).count();
    ledger.check("stalled case-2/3 windows", stalls as f64, 0.0)?;
    Ok(trace)
}

/// The absorbing cycle together with everything extraction needs.
#[derive(Clone, Debug)]
pub struct AbsorbingCycle {
    pub cycle: Vec<VertexId>,
    pub path: AbsorbingPath,
    /// Every vertex off the cycle.
    pub off: Vec<VertexId>,
    pos: Vec<usize>,
    in_p: Vec<bool>,
}

impl AbsorbingCycle {
    pub fn new(cycle: Vec<VertexId>, path: AbsorbingPath, n: usize) -> Self {
        let off = path.reserve.clone();
        Self::with_off(cycle, path, off, n)
    }

    /// As [`AbsorbingCycle::new`] with an explicit off-cycle list.
    pub fn with_off(cycle: Vec<VertexId>, path: AbsorbingPath, off: Vec<VertexId>, n: usize) -> Self {
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in cycle.iter().enumerate() {
            pos[v] = i;
        }
        let mut in_p = vec![false; n];
        for &v in &path.vertices {
            in_p[v] = true;
        }
        AbsorbingCycle { cycle, path, off, pos, in_p }
    }

    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    /// Index in the cycle of the first vertex of `P` when walking forwards.
    fn p_start(&self) -> (usize, bool) {
        let (a, b) = (self.path.vertices[0], self.path.vertices[1]);
        let l = self.len();
        let forward = self.cycle[(self.pos[a] + 1) % l] == b;
        (self.pos[a], forward)
    }

    /// Cycle order oriented so that `P` appears forwards, rotated to start at `start`.
    fn oriented(&self) -> Vec<VertexId> {
        let (s, forward) = self.p_start();
        let l = self.len();
        (0..l).map(|i| if forward { self.cycle[(s + i) % l] } else { self.cycle[(s + l - i) % l] }).collect()
    }
}

/// Inserts `u_j` into `e_j` for `j < count` along `cycle`.
fn absorb_into(cycle: &[VertexId], path: &AbsorbingPath, count: usize) -> Vec<VertexId> {
    let pairs: Vec<(Edge, VertexId)> =
        path.absorbing[..count].iter().zip(&path.reserve).map(|(&(z, zp), &u)| (edge(z, zp), u)).collect();
    insert_on_edges(cycle, &pairs)
}

/// Inserts each vertex between the ends of its cycle edge; edges missing from the cycle are ignored.
pub fn insert_on_edges(cycle: &[VertexId], pairs: &[(Edge, VertexId)]) -> Vec<VertexId> {
    let at: std::collections::HashMap<Edge, VertexId> = pairs.iter().copied().collect();
    let mut out = Vec::with_capacity(cycle.len() + pairs.len());
    let l = cycle.len();
    for i in 0..l {
        let (a, b) = (cycle[i], cycle[(i + 1) % l]);
        out.push(a);
        if let Some(&u) = at.get(&edge(a, b)) {
            out.push(u);
        }
    }
    out
}

/// Regime name used in reports for length `k`.
pub fn regime(n: usize, alpha: f64, cycle_len: usize, path_len: usize, k: usize) -> &'static str {
    if k >= cycle_len {
        "long"
    } else if (k as f64) <= alpha * alpha * n as f64 / 20.0 || k < path_len + 2 {
        "short"
    } else {
        "middle"
    }
}

/// A cycle on exactly `k` vertices of `H ∪ G`.
pub fn extract_cycle(inst: &PerturbedInstance, ac: &AbsorbingCycle, k: usize) -> Result<Vec<VertexId>, AbsorbError> {
    let n = inst.n();
    let l = ac.len();
    let m = ac.path.reserve.len();
    let reg = regime(n, inst.alpha(), l, ac.path.vertices.len(), k);
    let fail = |reason: &str| AbsorbError::ExtractionFailed { k, regime: reg, reason: reason.to_string() };
    if k < 3 || k > n {
        return Err(fail("length out of range"));
    }
    if k == l {
        return Ok(ac.cycle.clone());
    }
    if k > l {
        if k - l > m {
            return Err(fail("more vertices missing than absorbers"));
        }
        return Ok(absorb_into(&ac.cycle, &ac.path, k - l));
    }
    if let Some(c) = close_anywhere(inst, ac, k) {
        return Ok(c);
    }
    let p_len = ac.path.vertices.len();
    if k - 2 < p_len {
        return Err(fail("no available edge off any placement"));
    }
    close_around_p(inst, ac, k).ok_or_else(|| fail("no placement containing P closes"))
}

/// `P'` is any `(k−2)`-vertex stretch of the cycle from `x` to `y`, closed by
/// `x z z' y` with `zz' ∈ E(G)` off `P'`.
fn close_anywhere(inst: &PerturbedInstance, ac: &AbsorbingCycle, k: usize) -> Option<Vec<VertexId>> {
    let l = ac.len();
    let n = inst.n();
    let span = k - 2;
    let mut outside = vec![true; n];
    let cyc = &ac.cycle;
    for &v in &cyc[..span] {
        outside[v] = false;
    }
    for s in 0..l {
        if s > 0 {
            outside[cyc[s - 1]] = true;
            outside[cyc[(s + span - 1) % l]] = false;
        }
        let (x, y) = (cyc[s], cyc[(s + span - 1) % l]);
        let close = |z: VertexId| -> Option<(VertexId, VertexId)> {
            inst.g().neighbors(z).iter().find(|&&zp| outside[zp] && inst.h_adjacent(y, zp)).map(|&zp| (z, zp))
        };
        let found = if n - span < inst.h().degree(x) {
            (0..l - span)
                .map(|i| cyc[(s + span + i) % l])
                .chain(ac.off.iter().copied())
                .filter(|&z| inst.h_adjacent(x, z))
                .find_map(close)
        } else {
            inst.h().neighbors(x).iter().filter(|&&z| outside[z]).find_map(|&z| close(z))
        };
        if let Some((z, zp)) = found {
            let mut out: Vec<VertexId> = (0..span).map(|i| cyc[(s + i) % l]).collect();
            out.extend([zp, z]);
            return Some(out);
        }
    }
    None
}

/// `P' ⊇ P`, closed using an available edge inside `P'`, and topped up with absorbers.
fn close_around_p(inst: &PerturbedInstance, ac: &AbsorbingCycle, k: usize) -> Option<Vec<VertexId>> {
    let l = ac.len();
    let m = ac.path.reserve.len();
    let p_len = ac.path.vertices.len();
    let span = k - 2;
    let cyc = ac.oriented();
    // P occupies indices 0..p_len of `cyc`; P' starts at index `s` (mod l)
    let slack = span - p_len;
    for back in 0..=slack {
        let s = (l - back) % l;
        let stretch: Vec<VertexId> = (0..span).map(|i| cyc[(s + i) % l]).collect();
        let (x, y) = (stretch[0], stretch[span - 1]);
        let mut idx = vec![usize::MAX; inst.n()];
        for (i, &v) in stretch.iter().enumerate() {
            idx[v] = i;
        }
        // edges of P' off P with z ∈ N_H(x), z' ∈ N_H(y)
        let mut reversed = None;
        let mut forward = Vec::new();
        for i in 0..span - 1 {
            let (a, b) = (stretch[i], stretch[i + 1]);
            if ac.in_p[a] || ac.in_p[b] || !inst.g_adjacent(a, b) {
                continue;
            }
            // z' = a (closer to x), z = b
            if reversed.is_none() && inst.h_adjacent(x, b) && inst.h_adjacent(y, a) && m >= 2 {
                reversed = Some(i);
            }
            if inst.h_adjacent(x, a) && inst.h_adjacent(y, b) {
                forward.push(i);
            }
        }
        if let Some(i) = reversed {
            // x … z' then y … z backwards
            let mut out: Vec<VertexId> = stretch[..=i].to_vec();
            out.extend(stretch[i + 1..].iter().rev());
            return Some(absorb_into(&out, &ac.path, 2));
        }
        // pairs zz' before ww' with P not strictly between z' and w
        let p_lo = back;
        let mut best: Option<(usize, usize, usize)> = None;
        let mut last_end = None;
        let mut disjoint = Vec::new();
        for &i in &forward {
            if last_end.is_none_or(|e| e < i) {
                disjoint.push(i);
                last_end = Some(i + 1);
            }
        }
        for a in 0..disjoint.len() {
            for b in a + 1..disjoint.len() {
                let (iz, iw) = (disjoint[a], disjoint[b]);
                let ell = iw - iz;
                if ell > m || best.is_some_and(|(e, _, _)| e <= ell) {
                    break;
                }
                // interior of z'..w is iz+2..iw
                let interior = iz + 2..iw;
                if interior.contains(&p_lo) {
                    continue;
                }
                best = Some((ell, iz, iw));
            }
        }
        if let Some((ell, iz, iw)) = best {
            let mut out: Vec<VertexId> = stretch[..=iz + 1].to_vec();
            out.extend(stretch[iw..].iter().rev());
            debug_assert_eq!(out.len() + ell, k);
            let _ = idx;
            return Some(absorb_into(&out, &ac.path, ell));
        }
    }
    None
}

/// One failed length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub k: usize,
    pub stage: String,
    pub reason: String,
}

/// Cycles found for each length plus failures.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Witness {
    pub n: usize,
    pub cycles: Vec<CycleCertificate>,
    pub failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge: Option<MergeTrace>,
    pub absorbers: usize,
    pub ledger: Ledger,
}

impl Witness {
    /// Every length `3..=n` has a certified cycle.
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty() && self.cycles.len() == self.n.saturating_sub(2)
    }

    pub(crate) fn fail_all(&mut self, stage: &str, reason: String) {
        for k in 3..=self.n {
            self.failures.push(Failure { k, stage: stage.to_string(), reason: reason.clone() });
        }
    }

    /// Records the cycle if it validates against `H ∪ G`.
    pub(crate) fn offer(&mut self, inst: &PerturbedInstance, k: usize, vertices: Vec<VertexId>) {
        let cert = CycleCertificate { k, vertices };
        match validate_cycle(inst.union(), &cert) {
            Ok(()) => self.cycles.push(cert),
            Err(v) => self.failures.push(Failure { k, stage: "validate".into(), reason: v.to_string() }),
        }
    }
}

/// Runs all three phases; `matching` selects the matching-augmented mode.
pub fn pancyclic_witness<R: Rng + ?Sized>(
    inst: &PerturbedInstance,
    matching: Option<&[Edge]>,
    cfg: &AbsorbConfig,
    rng: &mut R,
) -> Witness {
    let n = inst.n();
    let mut w = Witness { n, ledger: Ledger::new(cfg.strictness), ..Default::default() };
    let mut ledger = Ledger::new(cfg.strictness);
    let built = build_absorber(inst, matching, cfg, &mut ledger, rng);
    let (path, mut sys) = match built {
        Ok(b) => b,
        Err(e) => {
            w.ledger = ledger;
            w.fail_all("absorber", e.to_string());
            return w;
        }
    };
    w.absorbers = path.reserve.len();
    match merge_to_cycle(inst, &path, &mut sys, cfg, &mut ledger, rng) {
        Ok(trace) => w.merge = Some(trace),
        Err(e) => {
            w.ledger = ledger;
            w.fail_all("merge", e.to_string());
            return w;
        }
    }
    w.ledger = ledger;
    let start = path.vertices[0];
    let ac = AbsorbingCycle::new(sys.component_vertices(start), path, n);
    for k in 3..=n {
        match extract_cycle(inst, &ac, k) {
            Ok(c) => w.offer(inst, k, c),
            Err(e) => w.failures.push(Failure { k, stage: "extract".into(), reason: e.to_string() }),
        }
    }
    w
}
