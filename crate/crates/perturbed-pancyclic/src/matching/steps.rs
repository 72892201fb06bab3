//! Six rewiring steps that turn `M ∪ G` into one cycle through an absorbing
//! path, leaving a small removed set `S` off the cycle.
//!
//! `M` is a maximum matching of `H` restricted to `B ∪ C` and `G` is a perfect
//! matching, so `M ∪ G` starts with maximum degree two. Every deleted edge is
//! recorded as unavailable (`D`); a `B₁` vertex whose matching edge is deleted
//! or protected is blocked (`K`).

use std::collections::{BTreeMap, HashSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::partition::{Check, Part, Partition};
use super::PipelineConfig;
use crate::absorb::{order, pick, AbsorbingPath};
use crate::graph::{edge, ComponentKind, Edge, PathCycleSystem, VertexId};
use crate::ledger::{log_sq, BoundExceeded, Ledger, Strictness};
use crate::perturb::PerturbedInstance;

/// Candidates tried per side when repairing a long cycle.
const REPAIR_CAP: usize = 32;

/// How the final merging step picks the two paths to join.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Two paths chosen at random.
    #[default]
    Random,
    /// Always extend the path containing the absorber.
    GrowAbsorber,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StepError {
    #[error("step {step} case {case}: {reason}")]
    Stuck { step: u8, case: &'static str, reason: String },
    #[error("step {step}: property {name} failed: {detail}")]
    Property { step: u8, name: String, detail: String },
    #[error(transparent)]
    Bound(#[from] BoundExceeded),
}

impl StepError {
    pub fn step(&self) -> Option<u8> {
        match self {
            StepError::Stuck { step, .. } | StepError::Property { step, .. } => Some(*step),
            StepError::Bound(_) => None,
        }
    }
}

/// State sizes and property checks after one step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub step: u8,
    pub removed: usize,
    pub unavailable: usize,
    pub blocked: usize,
    pub paths: usize,
    pub cycles: usize,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StepTrace {
    pub reports: Vec<StepReport>,
    /// Occurrences per `step:case` tag.
    pub cases: BTreeMap<String, usize>,
    pub absorbers: usize,
    /// Absorber count before capping by `|R|/8`.
    pub absorbers_uncapped: usize,
    /// Short cycles wiped while threading the absorber.
    pub short_cycles: usize,
    pub ledger: Ledger,
}

impl StepTrace {
    pub fn count(&self, tag: &str) -> usize {
        self.cases.get(tag).copied().unwrap_or(0)
    }
}

/// The cycle on `V ∖ S` and what extraction needs.
#[derive(Clone, Debug)]
pub struct SixStepOutcome {
    pub cycle: Vec<VertexId>,
    /// `reserve = U`, `absorbing = x_i y_i`, `connectors = w_i z_i`, `vertices = P`.
    pub path: AbsorbingPath,
    /// `S`, which contains `U`.
    pub removed: Vec<VertexId>,
    pub unavailable: HashSet<Edge>,
}

/// Absorber count: `max(2, min(⌈3/(ηα²)⌉, ⌊|R|/8⌋))` and the uncapped value.
pub fn absorber_target(eta: f64, alpha: f64, reserve: usize) -> (usize, usize) {
    let uncapped = (3.0 / (eta * alpha * alpha)).ceil() as usize;
    (uncapped.min(reserve / 8).max(2), uncapped)
}

fn bfs_ball(n: usize, sources: &[VertexId], radius: usize, nbrs: impl Fn(VertexId) -> Vec<VertexId>) -> Vec<bool> {
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] == usize::MAX {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if dist[v] == radius {
            continue;
        }
        for w in nbrs(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist.into_iter().map(|d| d != usize::MAX).collect()
}

struct State<'a, R: Rng + ?Sized> {
    inst: &'a PerturbedInstance,
    part: &'a Partition,
    cfg: &'a PipelineConfig,
    rng: &'a mut R,
    mate: Vec<Option<VertexId>>,
    sys: PathCycleSystem,
    in_s: Vec<bool>,
    s_list: Vec<VertexId>,
    d: HashSet<Edge>,
    in_k: Vec<bool>,
    k_count: usize,
    in_u: Vec<bool>,
    u: Vec<VertexId>,
    absorbing: Vec<(VertexId, VertexId)>,
    connectors: Vec<(VertexId, VertexId)>,
    p: Vec<VertexId>,
    in_p: Vec<bool>,
    step: u8,
    trace: StepTrace,
}

type StepResult<T> = Result<T, StepError>;

impl<'a, R: Rng + ?Sized> State<'a, R> {
    fn role(&self, v: VertexId) -> Part {
        self.part.part(v)
    }

    fn stuck(&self, case: &'static str, reason: impl Into<String>) -> StepError {
        StepError::Stuck { step: self.step, case, reason: reason.into() }
    }

    fn tally(&mut self, case: &str) {
        *self.trace.cases.entry(format!("{}:{case}", self.step)).or_default() += 1;
    }

    fn mark_k(&mut self, v: VertexId) {
        if !self.in_k[v] {
            self.in_k[v] = true;
            self.k_count += 1;
        }
    }

    /// Puts `ab` into `D`, blocking a `B₁` end of a matching edge.
    fn protect(&mut self, a: VertexId, b: VertexId) {
        self.d.insert(edge(a, b));
        if self.mate[a] == Some(b) {
            for v in [a, b] {
                if self.role(v) == Part::B1 {
                    self.mark_k(v);
                }
            }
        }
    }

    fn remove(&mut self, a: VertexId, b: VertexId) -> StepResult<()> {
        self.sys.delete_edge(a, b).map_err(|e| self.stuck("remove", e.to_string()))?;
        self.protect(a, b);
        Ok(())
    }

    /// Removes the matching edge at `v`.
    fn remove_mate(&mut self, v: VertexId) -> StepResult<()> {
        let w = self.mate[v].ok_or_else(|| self.stuck("remove", format!("{v} is unmatched")))?;
        self.remove(v, w)
    }

    fn add(&mut self, a: VertexId, b: VertexId) -> StepResult<()> {
        self.sys.insert_edge(a, b).map_err(|e| self.stuck("add", e.to_string()))
    }

    fn to_s(&mut self, v: VertexId) -> StepResult<()> {
        if !self.in_s[v] {
            self.sys.deactivate(v).map_err(|e| self.stuck("remove vertex", e.to_string()))?;
            self.in_s[v] = true;
            self.s_list.push(v);
        }
        Ok(())
    }

    fn other(&self, v: VertexId, not: VertexId) -> StepResult<VertexId> {
        self.sys.other_neighbor(v, not).ok_or_else(|| self.stuck("walk", format!("{v} has no second neighbour")))
    }

    fn mate_present(&self, v: VertexId) -> bool {
        self.mate[v].is_some_and(|w| self.sys.has_edge(v, w))
    }

    /// A `B₁` vertex in `N_H(from)` outside `K ∪ S ∪ avoid` whose matching edge is present.
    fn choose_b1(&mut self, from: VertexId, avoid: &[VertexId], avoid_au_nbrs: bool) -> Option<VertexId> {
        let au_nbrs: HashSet<VertexId> = if avoid_au_nbrs {
            (0..self.inst.n())
                .filter(|&v| !self.in_s[v] && (self.role(v) == Part::A || self.in_u[v]))
                .flat_map(|v| self.sys.neighbors(v).collect::<Vec<_>>())
                .collect()
        } else {
            HashSet::new()
        };
        let cands: Vec<VertexId> = self
            .inst
            .h()
            .neighbors(from)
            .iter()
            .copied()
            .filter(|&z| {
                self.role(z) == Part::B1
                    && !self.in_k[z]
                    && !self.in_s[z]
                    && !avoid.contains(&z)
                    && !au_nbrs.contains(&z)
                    && self.mate_present(z)
                    && !self.sys.has_edge(from, z)
            })
            .collect();
        pick(&cands, self.cfg.selection, self.rng)
    }

    fn sizes_ledger(&mut self, factor: f64, extra_s: f64) -> StepResult<()> {
        let lsq = log_sq(self.inst.n());
        let t = self.u.len() as f64;
        let st = self.step;
        self.trace.ledger.check(&format!("step {st} |S|"), self.s_list.len() as f64, factor * lsq + extra_s)?;
        self.trace.ledger.check(&format!("step {st} |D|"), self.d.len() as f64, factor * lsq + 16.0 * t)?;
        self.trace.ledger.check(&format!("step {st} |K|"), self.k_count as f64, factor * lsq + 16.0 * t)?;
        Ok(())
    }

    fn report(&mut self, checks: Vec<Check>) -> StepResult<()> {
        let failed = checks.iter().find(|c| !c.ok).cloned();
        self.trace.reports.push(StepReport {
            step: self.step,
            removed: self.s_list.len(),
            unavailable: self.d.len(),
            blocked: self.k_count,
            paths: self.sys.path_count(),
            cycles: self.sys.cycle_count(),
            checks,
        });
        match failed {
            Some(c) if self.cfg.strictness == Strictness::Strict => {
                Err(StepError::Property { step: self.step, name: c.name, detail: c.detail })
            }
            _ => Ok(()),
        }
    }

    fn p_intact(&self) -> Check {
        let ok = self.p.windows(2).all(|w| self.sys.has_edge(w[0], w[1]));
        Check::new("P kept", ok, format!("{} vertices", self.p.len()))
    }

    /// Every path end (and isolated vertex) lies in `parts`.
    fn ends_in(&self, name: &str, parts: &[Part]) -> Check {
        let bad = self
            .sys
            .components()
            .into_iter()
            .filter_map(|c| c.ends)
            .flat_map(|(a, b)| [a, b])
            .find(|&v| !self.part.is(v, parts));
        Check::new(name, bad.is_none(), bad.map_or_else(String::new, |v| format!("end {v} in {:?}", self.role(v))))
    }

    // Step 1: drop M ∩ G.
    fn step1(&mut self) -> StepResult<()> {
        self.step = 1;
        let n = self.inst.n();
        for v in 0..n {
            if let Some(w) = self.mate[v] {
                if v < w && self.inst.g_adjacent(v, w) {
                    self.tally("shared");
                    self.remove(v, w)?;
                    self.to_s(v)?;
                    self.to_s(w)?;
                }
            }
        }
        let ends = self.ends_in("A2", &[Part::A, Part::R]);
        let alternating = (0..n).filter(|&v| !self.in_s[v] && self.sys.degree(v) == 2).all(|v| {
            let mut it = self.sys.neighbors(v);
            let (a, b) = (it.next().unwrap(), it.next().unwrap());
            (self.mate[v] == Some(a)) != (self.mate[v] == Some(b))
        });
        self.sizes_ledger(2.0, 0.0)?;
        self.report(vec![ends, Check::new("A3", alternating, String::new())])
    }

    // Step 2: reserve U and thread the absorbing path.
    fn step2(&mut self) -> StepResult<()> {
        self.step = 2;
        let n = self.inst.n();
        let reserve: Vec<VertexId> = self.part.members(Part::R).into_iter().filter(|&v| !self.in_s[v]).collect();
        let (t, uncapped) = match self.cfg.absorbers {
            Some(t) => (t, absorber_target(self.cfg.eta, self.part.alpha, reserve.len()).1),
            None => absorber_target(self.cfg.eta, self.part.alpha, reserve.len()),
        };
        self.trace.absorbers = t;
        self.trace.absorbers_uncapped = uncapped;
        if reserve.len() < t || t < 2 {
            return Err(self.stuck("reserve", format!("{} reserve vertices for {t} absorbers", reserve.len())));
        }
        let snap: Vec<Vec<VertexId>> = (0..n).map(|v| self.sys.neighbors(v).collect()).collect();
        let mut pool = reserve;
        order(&mut pool, self.cfg.selection, self.rng);
        let mut used = 0;
        // pick reserve vertices that have an available absorbing edge
        while self.u.len() < t {
            let Some(&u) = pool.get(used) else {
                return Err(self.stuck("absorbing edge", format!("only {} of {t} reserve vertices usable", self.u.len())));
            };
            used += 1;
            let mut cands = Vec::new();
            for &a in self.inst.h().neighbors(u) {
                if !self.usable_b1(a) {
                    continue;
                }
                for &b in self.inst.g().neighbors(a) {
                    if a < b
                        && self.usable_b1(b)
                        && self.inst.h_adjacent(u, b)
                        && self.sys.has_edge(a, b)
                        && !self.d.contains(&edge(a, b))
                    {
                        cands.push((a, b));
                    }
                }
            }
            let Some((a, b)) = pick(&cands, self.cfg.selection, self.rng) else { continue };
            self.protect(a, b);
            self.in_u[u] = true;
            self.u.push(u);
            self.absorbing.push((a, b));
        }
        let x1 = self.absorbing[0].0;
        let yt = self.absorbing[t - 1].1;
        let ends: Vec<VertexId> = self.absorbing.iter().flat_map(|&(a, b)| [a, b]).collect();
        for &v in &ends {
            if v != x1 && v != yt {
                self.remove_mate(v)?;
            }
        }
        self.mark_k(x1);
        self.mark_k(yt);
        let mut w_set = ends.clone();
        w_set.push(self.mate[x1].unwrap());
        w_set.push(self.mate[yt].unwrap());
        for i in 0..t - 1 {
            let (yi, xn) = (self.absorbing[i].1, self.absorbing[i + 1].0);
            let near_w = bfs_ball(n, &w_set, 4, |v| self.sys.neighbors(v).collect());
            let near_w1 = bfs_ball(n, &w_set, 1, |v| snap[v].clone());
            let k_list: Vec<VertexId> = (0..n).filter(|&v| self.in_k[v]).collect();
            let near_k = bfs_ball(n, &k_list, 4, |v| snap[v].clone());
            let blocked = |v: VertexId| near_w[v] || near_w1[v] || near_k[v];
            let in_u = &self.in_u;
            let in_s = &self.in_s;
            let cands = self.inst.available_edges(yi, xn, &|v| in_u[v] || in_s[v] || blocked(v), &self.sys, &self.d);
            let Some((w, z)) = pick(&cands, self.cfg.selection, self.rng) else {
                return Err(self.stuck("connector", format!("no connector between absorbers {i} and {}", i + 1)));
            };
            self.protect(w, z);
            let mut touched = vec![w, z];
            let comp = self.sys.component(w).expect("active");
            if comp.kind == ComponentKind::Cycle && comp.size <= 8 {
                self.trace.short_cycles += 1;
                self.tally("short cycle");
                let cyc = self.sys.component_vertices(w);
                let l = cyc.len();
                for j in 0..l {
                    let (a, b) = (cyc[j], cyc[(j + 1) % l]);
                    if edge(a, b) != edge(w, z) {
                        self.remove(a, b)?;
                    }
                }
                for v in cyc {
                    if v != w && v != z {
                        self.to_s(v)?;
                    }
                }
            } else {
                for x in [w, z] {
                    touched.extend(self.detach(x, w, z)?);
                }
            }
            self.add(yi, w)?;
            self.add(z, xn)?;
            self.connectors.push((w, z));
            w_set.extend(touched);
        }
        let mut p = vec![self.mate[x1].unwrap()];
        for i in 0..t {
            let (x, y) = self.absorbing[i];
            p.extend([x, y]);
            if let Some(&(w, z)) = self.connectors.get(i) {
                p.extend([w, z]);
            }
        }
        p.push(self.mate[yt].unwrap());
        for &v in &p {
            self.in_p[v] = true;
        }
        self.p = p;
        let kept = self.p_intact();
        let (a, b) = (self.p[0], *self.p.last().unwrap());
        let ends_ok = self.role(a) == Part::B2 && self.role(b) == Part::B2;
        let ends = Check::new("B2", ends_ok, format!("ends {a}, {b}"));
        let len = Check::new("P length", self.p.len() == 4 * t, format!("{} for t = {t}", self.p.len()));
        self.sizes_ledger(3.0, 8.0 * t as f64)?;
        self.report(vec![kept, ends, len])
    }

    fn usable_b1(&self, v: VertexId) -> bool {
        self.role(v) == Part::B1 && !self.in_k[v] && !self.in_s[v] && self.mate_present(v)
    }

    /// Frees one end `x` of a new connector `w z` so that it keeps only that edge.
    fn detach(&mut self, x: VertexId, w: VertexId, z: VertexId) -> StepResult<Vec<VertexId>> {
        match self.role(x) {
            Part::A | Part::R => {
                self.tally("3.1");
                Ok(vec![])
            }
            Part::B1 => {
                self.tally("3.2");
                let m = self.mate[x].unwrap();
                self.remove_mate(x)?;
                Ok(vec![m])
            }
            Part::C1 => {
                self.tally("3.3");
                let y = self.mate[x].unwrap();
                let zstar = self.other(y, x)?;
                let zz = self
                    .choose_b1(y, &[w, z, zstar], true)
                    .ok_or_else(|| self.stuck("3.3", format!("no B1 neighbour for {y}")))?;
                let m = self.mate[zz].unwrap();
                self.remove(x, y)?;
                self.remove_mate(zz)?;
                self.add(y, zz)?;
                Ok(vec![y, zz, m])
            }
            Part::B2 | Part::C2 => {
                let y = self.mate[x].unwrap();
                if !self.sys.has_edge(x, y) {
                    return Err(self.stuck("3.4", format!("matching edge at {x} already gone")));
                }
                let zz = self.other(y, x)?;
                match self.role(zz) {
                    Part::A | Part::R => {
                        self.tally("3.4.1");
                        self.remove(x, y)?;
                        self.remove(y, zz)?;
                        self.to_s(y)?;
                        Ok(vec![zz])
                    }
                    Part::B2 => {
                        self.tally("3.4.2");
                        let zp = self.other(zz, y)?;
                        self.remove(x, y)?;
                        self.remove(y, zz)?;
                        self.to_s(y)?;
                        self.mark_k(zp);
                        Ok(vec![zz, zp])
                    }
                    Part::B1 => {
                        self.tally("3.4.3");
                        let zp = self.other(zz, y)?;
                        self.remove(x, y)?;
                        self.remove(y, zz)?;
                        self.remove(zz, zp)?;
                        self.to_s(y)?;
                        self.to_s(zz)?;
                        Ok(vec![zp])
                    }
                    Part::C2 => {
                        self.tally("3.4.4");
                        let zstar = self.sys.other_neighbor(zz, y).unwrap_or(zz);
                        let zp = self
                            .choose_b1(zz, &[w, z, zstar], true)
                            .ok_or_else(|| self.stuck("3.4.4", format!("no B1 neighbour for {zz}")))?;
                        let m = self.mate[zp].unwrap();
                        self.remove(x, y)?;
                        self.remove(y, zz)?;
                        self.remove_mate(zp)?;
                        self.to_s(y)?;
                        self.add(zz, zp)?;
                        Ok(vec![zz, zp, m])
                    }
                    Part::C1 => {
                        self.tally("3.4.5");
                        let zp = self.other(zz, y)?;
                        let zstar = self.sys.other_neighbor(zp, zz).unwrap_or(zp);
                        let zpp = self
                            .choose_b1(zp, &[w, z, zstar], true)
                            .ok_or_else(|| self.stuck("3.4.5", format!("no B1 neighbour for {zp}")))?;
                        let m = self.mate[zpp].unwrap();
                        self.remove(x, y)?;
                        self.remove(y, zz)?;
                        self.remove(zz, zp)?;
                        self.remove_mate(zpp)?;
                        self.to_s(y)?;
                        self.to_s(zz)?;
                        self.add(zp, zpp)?;
                        Ok(vec![zp, zpp, m])
                    }
                }
            }
        }
    }

    // Step 3: strip every edge at A ∪ U off P, then remove those vertices.
    fn step3(&mut self) -> StepResult<()> {
        self.step = 3;
        let n = self.inst.n();
        let targets: Vec<VertexId> = (0..n)
            .filter(|&v| !self.in_s[v] && !self.in_p[v] && (self.role(v) == Part::A || self.in_u[v]))
            .collect();
        for &x in &targets {
            loop {
                let Some(y) = self.sys.neighbors(x).next() else { break };
                if self.role(y) == Part::A || self.in_u[y] || self.role(y) == Part::B2 {
                    self.tally("1");
                    self.remove(x, y)?;
                    continue;
                }
                match self.role(y) {
                    Part::R => {
                        self.tally("2");
                        self.remove(x, y)?;
                        if self.sys.degree(y) == 0 {
                            self.to_s(y)?;
                        }
                    }
                    Part::B1 => {
                        self.tally("3");
                        self.remove(x, y)?;
                        if self.mate_present(y) {
                            self.remove_mate(y)?;
                        }
                        if self.sys.degree(y) == 0 {
                            self.to_s(y)?;
                        } else {
                            return Err(self.stuck("3", format!("{y} keeps an edge")));
                        }
                    }
                    Part::C2 => {
                        self.tally("4");
                        let zstar = self.sys.other_neighbor(y, x).unwrap_or(y);
                        let z = self
                            .choose_b1(y, &[zstar], false)
                            .ok_or_else(|| self.stuck("4", format!("no B1 neighbour for {y}")))?;
                        self.remove(x, y)?;
                        self.remove_mate(z)?;
                        self.add(y, z)?;
                    }
                    Part::C1 => {
                        self.tally("5");
                        let z = self.other(y, x)?;
                        let zstar = self.sys.other_neighbor(z, y).unwrap_or(z);
                        let zp = self
                            .choose_b1(z, &[zstar], false)
                            .ok_or_else(|| self.stuck("5", format!("no B1 neighbour for {z}")))?;
                        self.remove(x, y)?;
                        self.remove(y, z)?;
                        self.remove_mate(zp)?;
                        self.add(z, zp)?;
                        self.to_s(y)?;
                    }
                    Part::A | Part::B2 => unreachable!(),
                }
            }
            self.to_s(x)?;
        }
        let kept = self.p_intact();
        let ends = self.ends_in("C3", &[Part::B2, Part::R]);
        let u_out = self.u.iter().all(|&u| self.in_s[u]);
        let a = self.part.size(Part::A) as f64;
        let t = self.u.len() as f64;
        self.sizes_ledger(4.0, a + 8.0 * t)?;
        self.report(vec![kept, ends, Check::new("C5", u_out, String::new())])
    }

    // Step 4: make the component of P a path.
    fn step4(&mut self) -> StepResult<()> {
        self.step = 4;
        let start = self.p[0];
        let comp = self.sys.component(start).expect("active");
        if comp.kind == ComponentKind::Cycle {
            let p_edges = self.p.len() - 1;
            if comp.size <= p_edges + 14 {
                self.tally("wipe");
                let cyc = self.sys.component_vertices(start);
                let l = cyc.len();
                for j in 0..l {
                    let (a, b) = (cyc[j], cyc[(j + 1) % l]);
                    if !(self.in_p[a] && self.in_p[b] && self.p_edge(a, b)) {
                        self.remove(a, b)?;
                    }
                }
                for v in cyc {
                    if !self.in_p[v] {
                        self.to_s(v)?;
                    }
                }
            } else {
                let (last, before) = (*self.p.last().unwrap(), self.p[self.p.len() - 2]);
                for (x, prev) in [(self.p[0], self.p[1]), (last, before)] {
                    self.walk_off(x, prev)?;
                }
            }
        }
        let kept = self.p_intact();
        let is_path = self.sys.component(start).is_some_and(|c| c.kind != ComponentKind::Cycle);
        let bound = 5.0 * log_sq(self.inst.n());
        let worst = self
            .sys
            .components()
            .into_iter()
            .filter(|c| c.kind == ComponentKind::Cycle)
            .map(|c| {
                let vs = self.sys.component_vertices(self.sys.representative(c.id));
                let b1 = vs.iter().filter(|&&v| self.role(v) == Part::B1).count() as f64;
                let b2 = vs.iter().filter(|&&v| self.role(v) == Part::B2).count() as f64;
                b1 - b2
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let balance = Check::new("D4", worst <= bound, format!("max B1 - B2 excess {worst}, bound {bound:.1}"));
        let a = self.part.size(Part::A) as f64;
        let t = self.u.len() as f64;
        self.sizes_ledger(5.0, a + 8.0 * t)?;
        self.report(vec![kept, Check::new("D2", is_path, String::new()), balance])
    }

    fn p_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.p.windows(2).any(|w| edge(w[0], w[1]) == edge(a, b))
    }

    /// Walks from the end `x` of `P` away from it to the first `B₂ ∪ C₂` vertex and cuts there.
    fn walk_off(&mut self, x: VertexId, prev: VertexId) -> StepResult<()> {
        let mut walk = vec![x];
        let (mut p, mut cur) = (prev, x);
        loop {
            let Some(next) = self.sys.other_neighbor(cur, p) else { return Ok(()) };
            walk.push(next);
            if self.part.is(next, &[Part::B2, Part::C2]) {
                break;
            }
            if walk.len() > 4 {
                return Err(StepError::Property {
                    step: 4,
                    name: "D3".into(),
                    detail: format!("no B2 ∪ C2 vertex within distance 3 of {x}"),
                });
            }
            p = cur;
            cur = next;
        }
        self.tally("walk");
        for pair in walk.windows(2) {
            self.remove(pair[0], pair[1])?;
        }
        for &v in &walk[1..walk.len() - 1] {
            self.to_s(v)?;
        }
        let y = *walk.last().unwrap();
        if self.role(y) == Part::C2 {
            let nb: Vec<VertexId> = self.sys.neighbors(y).collect();
            let z = self.choose_b1(y, &nb, false).ok_or_else(|| self.stuck("walk", format!("no B1 neighbour for {y}")))?;
            self.remove_mate(z)?;
            self.add(y, z)?;
        }
        Ok(())
    }

    // Step 5: break every remaining cycle.
    fn step5(&mut self) -> StepResult<()> {
        self.step = 5;
        while let Some(c) = self.sys.components().into_iter().find(|c| c.kind == ComponentKind::Cycle) {
            let cyc = self.sys.component_vertices(self.sys.representative(c.id));
            let l = cyc.len();
            if l <= 25 {
                self.tally("1");
                for j in 0..l {
                    self.remove(cyc[j], cyc[(j + 1) % l])?;
                }
                for v in cyc {
                    self.to_s(v)?;
                }
                continue;
            }
            let b2: Vec<usize> = (0..l).filter(|&i| self.role(cyc[i]) == Part::B2).collect();
            let gap = |a: usize, b: usize| (b + l - a) % l;
            let close = (0..b2.len())
                .filter(|_| b2.len() >= 2)
                .map(|j| (b2[j], b2[(j + 1) % b2.len()]))
                .map(|(a, b)| (gap(a, b), a))
                .filter(|&(g, _)| g <= 11)
                .min();
            if let Some((g, a)) = close {
                self.tally("2");
                for j in 0..g {
                    self.remove(cyc[(a + j) % l], cyc[(a + j + 1) % l])?;
                }
                for j in 1..g {
                    self.to_s(cyc[(a + j) % l])?;
                }
                continue;
            }
            self.tally("3");
            self.repair_long(&cyc)?;
        }
        let kept = self.p_intact();
        let acyclic = Check::new("E2", self.sys.cycle_count() == 0, String::new());
        let ends = self.ends_in("E3", &[Part::B2, Part::R]);
        let a = self.part.size(Part::A) as f64;
        let t = self.u.len() as f64;
        self.sizes_ledger(105.0, a + 8.0 * t)?;
        self.report(vec![kept, acyclic, ends])
    }

    /// Opens a long cycle between two `C₂` vertices and hangs each on a `B₁` vertex.
    fn repair_long(&mut self, cyc: &[VertexId]) -> StepResult<()> {
        let l = cyc.len();
        let c2: Vec<usize> = (0..l).filter(|&i| self.role(cyc[i]) == Part::C2).collect();
        let gap = |a: usize, b: usize| (b + l - a) % l;
        let m = c2.len();
        let triple = (0..m).filter(|_| m >= 3).map(|j| [c2[j], c2[(j + 1) % m], c2[(j + 2) % m]]).find(|t| {
            gap(t[0], t[1]) <= 3 && gap(t[1], t[2]) <= 3
        });
        let Some(triple) = triple else {
            return Err(self.stuck("3", format!("no C2 triple with gaps at most 3 on a cycle of length {l}")));
        };
        let on_cycle: HashSet<VertexId> = cyc.iter().copied().collect();
        let _ = on_cycle;
        for (ia, ib) in [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)] {
            let (pa, pb) = (triple[ia], triple[ib]);
            let (v1, v2) = (cyc[pa], cyc[pb]);
            // Q runs forwards from the earlier to the later index of the triple
            let (lo, hi) = if ia < ib { (pa, pb) } else { (pb, pa) };
            let q: Vec<VertexId> = (0..=gap(lo, hi)).map(|j| cyc[(lo + j) % l]).collect();
            let q_edges: Vec<Edge> = q.windows(2).map(|w| (w[0], w[1])).collect();
            let mut c1 = self.repair_candidates(v1);
            let mut c2 = self.repair_candidates(v2);
            order(&mut c1, self.cfg.selection, self.rng);
            order(&mut c2, self.cfg.selection, self.rng);
            c1.truncate(REPAIR_CAP);
            c2.truncate(REPAIR_CAP);
            for &w1 in &c1 {
                for &w2 in &c2 {
                    if w1 == w2 || self.mate[w1] == Some(w2) {
                        continue;
                    }
                    let (m1, m2) = (self.mate[w1].unwrap(), self.mate[w2].unwrap());
                    let mut remove = q_edges.clone();
                    remove.push((w1, m1));
                    remove.push((w2, m2));
                    let cycles = self.sys.cycle_count();
                    if self.sys.splice(&remove, &[]).is_err() {
                        continue;
                    }
                    let id = |v| self.sys.component_id(v);
                    let apart = id(v1) != id(w1) && id(v1) != id(w2) && id(w1) != id(w2) && id(v2) != id(w2);
                    let add = [(v1, w1), (v2, w2)];
                    if apart && self.sys.splice(&[], &add).is_ok() {
                        if self.sys.cycle_count() + 1 == cycles {
                            for &(a, b) in &remove {
                                self.protect(a, b);
                            }
                            for &v in &q[1..q.len() - 1] {
                                self.to_s(v)?;
                            }
                            return Ok(());
                        }
                        self.sys.undo(&[], &add);
                    }
                    self.sys.undo(&remove, &[]);
                }
            }
        }
        Err(self.stuck("3", "no admissible pair of B1 vertices"))
    }

    fn repair_candidates(&self, v: VertexId) -> Vec<VertexId> {
        let nb: Vec<VertexId> = self.sys.neighbors(v).collect();
        self.inst
            .h()
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| self.usable_b1(w) && !nb.contains(&w))
            .collect()
    }

    // Step 6: merge all paths into the path through P and close it.
    fn step6(&mut self) -> StepResult<Vec<VertexId>> {
        self.step = 6;
        let n = self.inst.n();
        let target: Vec<bool> = (0..n).map(|v| self.role(v) == Part::B1 && !self.in_s[v]).collect();
        let budget = 2 * n + 64;
        for _ in 0..budget {
            let comps = self.sys.components();
            if comps.len() <= 1 {
                break;
            }
            let home = self.sys.component_id(self.p[0]).unwrap();
            let mut ids: Vec<usize> = comps.iter().map(|c| c.id).collect();
            order(&mut ids, self.cfg.selection, self.rng);
            let first = match self.cfg.pairing {
                Pairing::GrowAbsorber => home,
                Pairing::Random => ids[0],
            };
            let merged = ids.iter().filter(|&&id| id != first).any(|&other| self.merge_pair(first, other, &target));
            if !merged {
                return Err(self.stuck("merge", format!("no available edge for any pair with {} paths", comps.len())));
            }
        }
        if self.sys.component_count() != 1 {
            return Err(self.stuck("merge", "budget exhausted"));
        }
        let view = self.sys.component(self.p[0]).unwrap();
        let Some((x, y)) = view.ends else { return Err(self.stuck("close", "already a cycle")) };
        let mut cands = self.inst.available_common_edges(x, y, &target, &self.sys, &self.d);
        order(&mut cands, self.cfg.selection, self.rng);
        let mut closed = false;
        for (mut z, mut zp) in cands {
            if self.sys.dist_along(x, z) > self.sys.dist_along(x, zp) {
                std::mem::swap(&mut z, &mut zp);
            }
            if let Ok(delta) = self.sys.splice(&[(z, zp)], &[(x, zp), (y, z)]) {
                if self.sys.cycle_count() == 1 && self.sys.path_count() == 0 {
                    self.tally("close");
                    self.protect(z, zp);
                    closed = true;
                    break;
                }
                let _ = delta;
                self.sys.undo(&[(z, zp)], &[(x, zp), (y, z)]);
            }
        }
        if !closed {
            return Err(self.stuck("close", format!("no available edge for ends {x}, {y}")));
        }
        let cycle = self.sys.component_vertices(self.p[0]);
        let spans = cycle.len() + self.s_list.len() == n;
        let l = cycle.len();
        let pos: std::collections::HashMap<VertexId, usize> = cycle.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let p_consecutive = self.p.windows(2).all(|w| {
            let (a, b) = (pos[&w[0]], pos[&w[1]]);
            (a + 1) % l == b || (b + 1) % l == a
        });
        let a = self.part.size(Part::A) as f64;
        let t = self.u.len() as f64;
        let lsq = log_sq(n);
        self.trace.ledger.check("final |S|", self.s_list.len() as f64, 105.0 * lsq + a + 8.0 * t)?;
        self.report(vec![
            Check::new("F2", spans, format!("cycle {l}, removed {}", self.s_list.len())),
            Check::new("P on cycle", p_consecutive, String::new()),
        ])?;
        Ok(cycle)
    }

    /// Joins components `c1` and `c2` through one available edge; false if none works.
    fn merge_pair(&mut self, c1: usize, c2: usize, target: &[bool]) -> bool {
        let ends = |sys: &PathCycleSystem, id: usize| {
            let v = sys.representative(id);
            let (a, b) = sys.component(v).and_then(|c| c.ends).unwrap_or((v, v));
            if a == b {
                vec![a]
            } else {
                vec![a, b]
            }
        };
        let (e1, e2) = (ends(&self.sys, c1), ends(&self.sys, c2));
        for &x in &e1 {
            for &y in &e2 {
                let mut cands = self.inst.available_common_edges(x, y, target, &self.sys, &self.d);
                order(&mut cands, self.cfg.selection, self.rng);
                for (z, zp) in cands {
                    let (remove, add) = self.merge_plan(x, y, z, zp);
                    let before = self.sys.path_count();
                    let tag = if self.sys.same_component(x, z) || self.sys.same_component(y, z) {
                        "own path"
                    } else {
                        "third path"
                    };
                    match self.sys.splice(&remove, &add) {
                        Ok(_) if self.sys.path_count() + 1 == before && self.sys.cycle_count() == 0 => {
                            self.tally(tag);
                            self.protect(z, zp);
                            return true;
                        }
                        Ok(_) => self.sys.undo(&remove, &add),
                        Err(_) => {}
                    }
                }
            }
        }
        false
    }

    fn merge_plan(&self, x: VertexId, y: VertexId, z: VertexId, zp: VertexId) -> (Vec<Edge>, Vec<Edge>) {
        let remove = vec![(z, zp)];
        let near = |a: VertexId, u: VertexId, v: VertexId| self.sys.dist_along(a, u) < self.sys.dist_along(a, v);
        let add = if self.sys.same_component(x, z) {
            if near(x, z, zp) {
                vec![(x, zp), (y, z)]
            } else {
                vec![(x, z), (y, zp)]
            }
        } else if self.sys.same_component(y, z) {
            if near(y, z, zp) {
                vec![(y, zp), (x, z)]
            } else {
                vec![(y, z), (x, zp)]
            }
        } else {
            vec![(x, z), (y, zp)]
        };
        (remove, add)
    }
}

/// Runs all six steps on `M ∪ G`; `mate` is the maximum matching of `H`.
pub fn run_six_steps<R: Rng + ?Sized>(
    inst: &PerturbedInstance,
    part: &Partition,
    mate: &super::Matching,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> (Result<SixStepOutcome, StepError>, StepTrace) {
    let n = inst.n();
    let restricted: Vec<Option<VertexId>> = (0..n)
        .map(|v| mate.partner(v).filter(|_| part.is(v, &[Part::B1, Part::B2, Part::C1, Part::C2])))
        .collect();
    let mut edges: Vec<Edge> = inst.g().edges().collect();
    for v in 0..n {
        if let Some(w) = restricted[v] {
            if v < w && !inst.g_adjacent(v, w) {
                edges.push((v, w));
            }
        }
    }
    let mut trace = StepTrace { ledger: Ledger::new(cfg.strictness), ..Default::default() };
    let sys = match PathCycleSystem::from_edges(n, edges) {
        Ok(s) => s,
        Err(e) => {
            let err = StepError::Stuck { step: 1, case: "setup", reason: format!("M ∪ G is not a path/cycle system: {e}") };
            return (Err(err), trace);
        }
    };
    let mut st = State {
        inst,
        part,
        cfg,
        rng,
        mate: restricted,
        sys,
        in_s: vec![false; n],
        s_list: Vec::new(),
        d: HashSet::new(),
        in_k: vec![false; n],
        k_count: 0,
        in_u: vec![false; n],
        u: Vec::new(),
        absorbing: Vec::new(),
        connectors: Vec::new(),
        p: Vec::new(),
        in_p: vec![false; n],
        step: 0,
        trace: std::mem::take(&mut trace),
    };
    let result = (|| {
        st.step1()?;
        st.step2()?;
        st.step3()?;
        st.step4()?;
        st.step5()?;
        st.step6()
    })();
    let out = result.map(|cycle| SixStepOutcome {
        cycle,
        path: AbsorbingPath {
            reserve: st.u.clone(),
            absorbing: st.absorbing.clone(),
            connectors: st.connectors.clone(),
            vertices: st.p.clone(),
        },
        removed: st.s_list.clone(),
        unavailable: st.d.clone(),
    });
    (out, st.trace)
}
