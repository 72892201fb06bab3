use serde::Serialize;
use thiserror::Error;

use super::{edge, Edge, VertexId};

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// A path of length 0.
    Isolated,
    Path,
    Cycle,
}

impl ComponentKind {
    pub fn is_path(self) -> bool {
        matches!(self, ComponentKind::Isolated | ComponentKind::Path)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComponentView {
    pub id: usize,
    pub kind: ComponentKind,
    pub size: usize,
    /// Path endpoints; a degenerate path lists its vertex twice. `None` for cycles.
    pub ends: Option<(VertexId, VertexId)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("vertex {0} already has degree 2")]
    DegreeViolation(VertexId),
    #[error("vertex {0} is inactive")]
    Inactive(VertexId),
    #[error("edge {0}-{1} is not present")]
    MissingEdge(VertexId, VertexId),
    #[error("vertex {0} still has incident edges")]
    NonIsolated(VertexId),
    #[error("edge {0}-{1} would close a cycle shorter than 3")]
    ShortCycle(VertexId, VertexId),
    #[error("loop at vertex {0}")]
    Loop(VertexId),
    #[error("vertex {0} is already active")]
    AlreadyActive(VertexId),
}

/// A failed splice; the system is left exactly as before the call.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("splice rolled back at {stage} {edge:?}: {cause}")]
pub struct SpliceError {
    pub stage: &'static str,
    pub edge: Edge,
    pub cause: SystemError,
}

/// Change in component counts reported by a splice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SpliceDelta {
    pub paths: i64,
    pub nondegenerate_paths: i64,
    pub cycles: i64,
}

impl SpliceDelta {
    pub fn components(&self) -> i64 {
        self.paths + self.cycles
    }
}

#[derive(Clone, Debug)]
struct Comp {
    cycle: bool,
    size: usize,
    ends: [VertexId; 2],
    lo: i64,
}

/// Max-degree-2 graph kept as vertex-disjoint paths and cycles.
///
/// Every component stores contiguous integer positions `lo..lo+size`; a path
/// runs from `ends[0]` at `lo` to `ends[1]`, a cycle closes `lo+size-1` back to
/// `lo`. Joins relabel the smaller side, splits relabel the smaller half.
#[derive(Clone, Debug)]
pub struct PathCycleSystem {
    nbr: Vec<[VertexId; 2]>,
    active: Vec<bool>,
    comp_of: Vec<usize>,
    pos: Vec<i64>,
    comps: Vec<Option<Comp>>,
    free: Vec<usize>,
    paths: usize,
    isolated: usize,
    cycles: usize,
    edges: usize,
}

impl PathCycleSystem {
    /// `n` active isolated vertices.
    pub fn new(n: usize) -> Self {
        PathCycleSystem {
            nbr: vec![[NONE; 2]; n],
            active: vec![true; n],
            comp_of: (0..n).collect(),
            pos: vec![0; n],
            comps: (0..n).map(|v| Some(Comp { cycle: false, size: 1, ends: [v, v], lo: 0 })).collect(),
            free: Vec::new(),
            paths: n,
            isolated: n,
            cycles: 0,
            edges: 0,
        }
    }

    /// Builds a system from edges; fails on the first edge that breaks the degree bound.
    pub fn from_edges<I: IntoIterator<Item = Edge>>(n: usize, edges: I) -> Result<Self, SystemError> {
        let mut sys = Self::new(n);
        for (u, v) in edges {
            sys.insert_edge(u, v)?;
        }
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.nbr.len()
    }

    pub fn is_active(&self, v: VertexId) -> bool {
        self.active[v]
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.nbr[v].iter().filter(|&&w| w != NONE).count()
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.nbr[v].iter().copied().filter(|&w| w != NONE)
    }

    /// The neighbor of `v` other than `not`, if any.
    pub fn other_neighbor(&self, v: VertexId, not: VertexId) -> Option<VertexId> {
        let [a, b] = self.nbr[v];
        if a != NONE && a != not {
            Some(a)
        } else if b != NONE && b != not {
            Some(b)
        } else {
            None
        }
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.n() && v < self.n() && self.nbr[u].contains(&v)
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.n()).flat_map(move |u| self.neighbors(u).filter(move |&v| u < v).map(move |v| (u, v)))
    }

    /// Path components, degenerate ones included.
    pub fn path_count(&self) -> usize {
        self.paths
    }

    pub fn nondegenerate_path_count(&self) -> usize {
        self.paths - self.isolated
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles
    }

    pub fn component_count(&self) -> usize {
        self.paths + self.cycles
    }

    pub fn component_id(&self, v: VertexId) -> Option<usize> {
        self.active[v].then(|| self.comp_of[v])
    }

    pub fn component(&self, v: VertexId) -> Option<ComponentView> {
        let id = self.component_id(v)?;
        Some(self.view(id))
    }

    fn view(&self, id: usize) -> ComponentView {
        let c = self.comps[id].as_ref().expect("live component");
        let kind = if c.cycle {
            ComponentKind::Cycle
        } else if c.size == 1 {
            ComponentKind::Isolated
        } else {
            ComponentKind::Path
        };
        ComponentView { id, kind, size: c.size, ends: (!c.cycle).then_some((c.ends[0], c.ends[1])) }
    }

    /// Some vertex of component `id`.
    pub fn representative(&self, id: usize) -> VertexId {
        self.comps[id].as_ref().expect("live component").ends[0]
    }

    /// All live components.
    pub fn components(&self) -> Vec<ComponentView> {
        (0..self.comps.len()).filter(|&i| self.comps[i].is_some()).map(|i| self.view(i)).collect()
    }

    /// Position of `v` inside its component; consecutive along the component.
    pub fn position(&self, v: VertexId) -> i64 {
        self.pos[v]
    }

    pub fn same_component(&self, u: VertexId, v: VertexId) -> bool {
        self.active[u] && self.active[v] && self.comp_of[u] == self.comp_of[v]
    }

    /// Shortest along-component distance; `None` across components or for inactive vertices.
    pub fn dist_along(&self, u: VertexId, v: VertexId) -> Option<usize> {
        if !self.same_component(u, v) {
            return None;
        }
        let c = self.comps[self.comp_of[u]].as_ref().unwrap();
        let d = (self.pos[u] - self.pos[v]).unsigned_abs() as usize;
        Some(if c.cycle { d.min(c.size - d) } else { d })
    }

    /// Vertices of the component of `v` in order: from `ends.0` for a path,
    /// from `v` for a cycle.
    pub fn component_vertices(&self, v: VertexId) -> Vec<VertexId> {
        let Some(view) = self.component(v) else { return Vec::new() };
        let start = view.ends.map_or(v, |(a, _)| a);
        let mut out = Vec::with_capacity(view.size);
        let (mut prev, mut cur) = (NONE, start);
        loop {
            out.push(cur);
            match self.other_neighbor(cur, prev) {
                Some(next) if next != start && out.len() < view.size => {
                    prev = cur;
                    cur = next;
                }
                _ => break,
            }
        }
        out
    }

    fn alloc(&mut self, comp: Comp) -> usize {
        if let Some(id) = self.free.pop() {
            self.comps[id] = Some(comp);
            id
        } else {
            self.comps.push(Some(comp));
            self.comps.len() - 1
        }
    }

    fn uncount(&mut self, id: usize) {
        let c = self.comps[id].as_ref().unwrap();
        if c.cycle {
            self.cycles -= 1;
        } else {
            self.paths -= 1;
            if c.size == 1 {
                self.isolated -= 1;
            }
        }
    }

    fn count(&mut self, id: usize) {
        let c = self.comps[id].as_ref().unwrap();
        if c.cycle {
            self.cycles += 1;
        } else {
            self.paths += 1;
            if c.size == 1 {
                self.isolated += 1;
            }
        }
    }

    fn link(&mut self, u: VertexId, v: VertexId) {
        for (a, b) in [(u, v), (v, u)] {
            let s = &mut self.nbr[a];
            let i = if s[0] == NONE { 0 } else { 1 };
            s[i] = b;
        }
        self.edges += 1;
    }

    fn unlink(&mut self, u: VertexId, v: VertexId) {
        for (a, b) in [(u, v), (v, u)] {
            let s = &mut self.nbr[a];
            if s[0] == b {
                s[0] = s[1];
            }
            s[1] = NONE;
        }
        self.edges -= 1;
    }

    fn check_insert(&self, u: VertexId, v: VertexId) -> Result<(), SystemError> {
        if u == v {
            return Err(SystemError::Loop(u));
        }
        for w in [u, v] {
            if !self.active[w] {
                return Err(SystemError::Inactive(w));
            }
        }
        for w in [u, v] {
            if self.degree(w) >= 2 {
                return Err(SystemError::DegreeViolation(w));
            }
        }
        if self.comp_of[u] == self.comp_of[v] && self.comps[self.comp_of[u]].as_ref().unwrap().size < 3 {
            return Err(SystemError::ShortCycle(u, v));
        }
        Ok(())
    }

    /// Adds edge `u-v`, joining two paths or closing one into a cycle.
    pub fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), SystemError> {
        self.check_insert(u, v)?;
        let (cu, cv) = (self.comp_of[u], self.comp_of[v]);
        if cu == cv {
            // u and v are the two ends of one path
            self.uncount(cu);
            self.comps[cu].as_mut().unwrap().cycle = true;
            self.count(cu);
            self.link(u, v);
            return Ok(());
        }
        let (su, sv) = (self.comps[cu].as_ref().unwrap().size, self.comps[cv].as_ref().unwrap().size);
        let (big, b_end, small, s_end) = if su >= sv { (cu, u, cv, v) } else { (cv, v, cu, u) };
        self.uncount(big);
        self.uncount(small);
        let bc = self.comps[big].clone().unwrap();
        let sc = self.comps[small].take().unwrap();
        self.free.push(small);
        let at_hi = bc.ends[1] == b_end;
        let (mut p, step) = if at_hi { (bc.lo + bc.size as i64, 1) } else { (bc.lo - 1, -1) };
        let far = if sc.ends[0] == s_end { sc.ends[1] } else { sc.ends[0] };
        let (mut prev, mut cur) = (NONE, s_end);
        loop {
            self.comp_of[cur] = big;
            self.pos[cur] = p;
            p += step;
            match self.other_neighbor(cur, prev) {
                Some(next) => {
                    prev = cur;
                    cur = next;
                }
                None => break,
            }
        }
        let c = self.comps[big].as_mut().unwrap();
        c.size += sc.size;
        if at_hi {
            c.ends[1] = far;
        } else {
            c.ends[0] = far;
            c.lo -= sc.size as i64;
        }
        self.count(big);
        self.link(u, v);
        Ok(())
    }

    /// Removes edge `u-v`, opening a cycle or splitting a path.
    pub fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), SystemError> {
        if !self.has_edge(u, v) {
            return Err(SystemError::MissingEdge(u, v));
        }
        let id = self.comp_of[u];
        self.uncount(id);
        self.unlink(u, v);
        let c = self.comps[id].clone().unwrap();
        if c.cycle {
            let (mut prev, mut cur, mut p) = (NONE, v, 0i64);
            loop {
                self.pos[cur] = p;
                p += 1;
                match self.other_neighbor(cur, prev) {
                    Some(next) => {
                        prev = cur;
                        cur = next;
                    }
                    None => break,
                }
            }
            let c = self.comps[id].as_mut().unwrap();
            c.cycle = false;
            c.ends = [v, u];
            c.lo = 0;
            self.count(id);
            return Ok(());
        }
        let (a, b) = if self.pos[u] < self.pos[v] { (u, v) } else { (v, u) };
        let left = (self.pos[a] - c.lo + 1) as usize;
        let right = c.size - left;
        let left_part = Comp { cycle: false, size: left, ends: [c.ends[0], a], lo: c.lo };
        let right_part = Comp { cycle: false, size: right, ends: [b, c.ends[1]], lo: self.pos[b] };
        let (keep, moved, start) = if left >= right { (left_part, right_part, b) } else { (right_part, left_part, a) };
        self.comps[id] = Some(keep);
        let new_id = self.alloc(moved);
        let (mut prev, mut cur) = (NONE, start);
        loop {
            self.comp_of[cur] = new_id;
            match self.other_neighbor(cur, prev) {
                Some(next) => {
                    prev = cur;
                    cur = next;
                }
                None => break,
            }
        }
        self.count(id);
        self.count(new_id);
        Ok(())
    }

    /// Removes an isolated vertex from the system ("adds it to S").
    pub fn deactivate(&mut self, v: VertexId) -> Result<(), SystemError> {
        if !self.active[v] {
            return Err(SystemError::Inactive(v));
        }
        if self.degree(v) > 0 {
            return Err(SystemError::NonIsolated(v));
        }
        let id = self.comp_of[v];
        self.uncount(id);
        self.comps[id] = None;
        self.free.push(id);
        self.active[v] = false;
        self.comp_of[v] = NONE;
        Ok(())
    }

    /// Undoes `deactivate`: `v` returns as an isolated vertex.
    pub fn reactivate(&mut self, v: VertexId) -> Result<(), SystemError> {
        if self.active[v] {
            return Err(SystemError::AlreadyActive(v));
        }
        let id = self.alloc(Comp { cycle: false, size: 1, ends: [v, v], lo: 0 });
        self.active[v] = true;
        self.comp_of[v] = id;
        self.pos[v] = 0;
        self.count(id);
        Ok(())
    }

    /// Removes then adds edges atomically; on failure every applied change is undone.
    pub fn splice(&mut self, remove: &[Edge], add: &[Edge]) -> Result<SpliceDelta, SpliceError> {
        let before = (self.paths as i64, self.nondegenerate_path_count() as i64, self.cycles as i64);
        for (i, &(u, v)) in remove.iter().enumerate() {
            if let Err(cause) = self.delete_edge(u, v) {
                self.undo(&remove[..i], &[]);
                return Err(SpliceError { stage: "remove", edge: edge(u, v), cause });
            }
        }
        for (i, &(u, v)) in add.iter().enumerate() {
            if let Err(cause) = self.insert_edge(u, v) {
                self.undo(remove, &add[..i]);
                return Err(SpliceError { stage: "add", edge: edge(u, v), cause });
            }
        }
        Ok(SpliceDelta {
            paths: self.paths as i64 - before.0,
            nondegenerate_paths: self.nondegenerate_path_count() as i64 - before.1,
            cycles: self.cycles as i64 - before.2,
        })
    }

    /// Reverts a splice that removed `removed` and added `added`.
    pub fn undo(&mut self, removed: &[Edge], added: &[Edge]) {
        for &(u, v) in added.iter().rev() {
            self.delete_edge(u, v).expect("undo of an applied insertion");
        }
        for &(u, v) in removed.iter().rev() {
            self.insert_edge(u, v).expect("undo of an applied deletion");
        }
    }

    /// Full consistency audit of the component index against the adjacency.
    pub fn audit(&self) -> Result<(), String> {
        let n = self.n();
        let mut seen = vec![false; n];
        let (mut paths, mut isolated, mut cycles, mut degree_sum) = (0, 0, 0, 0);
        for v in 0..n {
            let d = self.degree(v);
            degree_sum += d;
            if !self.active[v] {
                if d > 0 {
                    return Err(format!("inactive vertex {v} has edges"));
                }
                continue;
            }
            for w in self.neighbors(v) {
                if !self.active[w] || !self.nbr[w].contains(&v) {
                    return Err(format!("asymmetric or dangling edge {v}-{w}"));
                }
            }
            if seen[v] {
                continue;
            }
            // collect the component by walking
            let mut members = vec![v];
            seen[v] = true;
            let mut stack = vec![v];
            while let Some(x) = stack.pop() {
                for y in self.neighbors(x) {
                    if !seen[y] {
                        seen[y] = true;
                        members.push(y);
                        stack.push(y);
                    }
                }
            }
            let id = self.comp_of[v];
            let c = self.comps.get(id).and_then(Option::as_ref).ok_or(format!("vertex {v} in dead component"))?;
            if members.iter().any(|&x| self.comp_of[x] != id) || c.size != members.len() {
                return Err(format!("component of {v} mislabelled"));
            }
            let ends: Vec<_> = members.iter().copied().filter(|&x| self.degree(x) < 2).collect();
            let is_cycle = ends.is_empty();
            if is_cycle != c.cycle {
                return Err(format!("component of {v} has wrong kind"));
            }
            let mut positions: Vec<i64> = members.iter().map(|&x| self.pos[x]).collect();
            positions.sort_unstable();
            if positions.iter().enumerate().any(|(i, &p)| p != c.lo + i as i64) {
                return Err(format!("positions of component {id} not contiguous"));
            }
            for &x in &members {
                for y in self.neighbors(x) {
                    let d = (self.pos[x] - self.pos[y]).abs();
                    let closing = c.cycle && d == c.size as i64 - 1;
                    if d != 1 && !closing {
                        return Err(format!("edge {x}-{y} not consecutive in positions"));
                    }
                }
            }
            if is_cycle {
                if c.size < 3 {
                    return Err(format!("cycle of length {}", c.size));
                }
                cycles += 1;
            } else {
                paths += 1;
                if c.size == 1 {
                    isolated += 1;
                }
                let (e0, e1) = (c.ends[0], c.ends[1]);
                if self.pos[e0] != c.lo || self.pos[e1] != c.lo + c.size as i64 - 1 {
                    return Err(format!("endpoints of component {id} misplaced"));
                }
                let mut want = ends.clone();
                if want.len() == 1 {
                    want.push(want[0]);
                }
                want.sort_unstable();
                let mut have = vec![e0, e1];
                have.sort_unstable();
                if want != have {
                    return Err(format!("endpoints of component {id} wrong"));
                }
            }
        }
        if (paths, isolated, cycles) != (self.paths, self.isolated, self.cycles) {
            return Err("component counters drifted".into());
        }
        if degree_sum != 2 * self.edges {
            return Err("edge counter drifted".into());
        }
        Ok(())
    }
}
