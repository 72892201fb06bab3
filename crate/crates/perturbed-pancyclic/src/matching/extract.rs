//! Cutting cycles of every length from the rewired cycle, and a counting
//! certificate that rules out a Hamiltonian cycle.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::steps::SixStepOutcome;
use crate::absorb::{extract_cycle, insert_on_edges, AbsorbError, AbsorbingCycle};
use crate::graph::{edge, Edge, StaticGraph, VertexId};
use crate::perturb::PerturbedInstance;

/// Regime label for length `k` against a cycle of length `cycle_len`.
pub fn regime(n: usize, alpha: f64, cycle_len: usize, k: usize) -> &'static str {
    if k >= cycle_len {
        "long"
    } else if (k as f64) <= alpha * alpha * n as f64 / 10.0 {
        "short"
    } else {
        "middle"
    }
}

/// The cycle on `V ∖ S` plus the one-by-one absorption plan for `S ∖ U`.
#[derive(Clone, Debug)]
pub struct MatchingCycle {
    pub ac: AbsorbingCycle,
    /// Removed vertices outside `U`, each with its own cycle edge inside its `H`-neighbourhood.
    pub extra: Vec<(Edge, VertexId)>,
}

impl MatchingCycle {
    pub fn new(inst: &PerturbedInstance, out: SixStepOutcome) -> Self {
        let n = inst.n();
        let in_u: HashSet<VertexId> = out.path.reserve.iter().copied().collect();
        let pool: Vec<VertexId> = out.removed.iter().copied().filter(|v| !in_u.contains(v)).collect();
        let extra = assign_edges(inst, &out.cycle, &pool, &out.unavailable);
        let ac = AbsorbingCycle::with_off(out.cycle, out.path, out.removed, n);
        MatchingCycle { ac, extra }
    }

    pub fn len(&self) -> usize {
        self.ac.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ac.is_empty()
    }

    pub fn extra_len(&self) -> usize {
        self.extra.len()
    }

    /// A cycle on exactly `k` vertices of `H ∪ G`.
    pub fn extract(&self, inst: &PerturbedInstance, k: usize) -> Result<Vec<VertexId>, AbsorbError> {
        let n = inst.n();
        let l = self.len();
        let reg = regime(n, inst.alpha(), l, k);
        let fail = |reason: String| AbsorbError::ExtractionFailed { k, regime: reg, reason };
        if k < 3 || k > n {
            return Err(fail("length out of range".into()));
        }
        if k == l {
            return Ok(self.ac.cycle.clone());
        }
        if k < l {
            return extract_cycle(inst, &self.ac, k).map_err(|e| match e {
                AbsorbError::ExtractionFailed { reason, .. } => fail(reason),
                other => fail(other.to_string()),
            });
        }
        let path = &self.ac.path;
        let t = path.reserve.len();
        let need = k - l;
        if need > t + self.extra.len() {
            return Err(fail(format!("{} removed vertices, only {} absorbable", n - l, t + self.extra.len())));
        }
        let mut pairs: Vec<(Edge, VertexId)> =
            path.absorbing.iter().zip(&path.reserve).take(need).map(|(&(a, b), &u)| (edge(a, b), u)).collect();
        pairs.extend(self.extra.iter().take(need.saturating_sub(t)).copied());
        Ok(insert_on_edges(&self.ac.cycle, &pairs))
    }
}

/// Maximum assignment of `pool` vertices to distinct cycle `G`-edges `ab ∉ D`
/// with `a, b ∈ N_H(v)`, by augmenting paths.
fn assign_edges(
    inst: &PerturbedInstance,
    cycle: &[VertexId],
    pool: &[VertexId],
    unavailable: &HashSet<Edge>,
) -> Vec<(Edge, VertexId)> {
    let l = cycle.len();
    let mut pos = vec![usize::MAX; inst.n()];
    for (i, &v) in cycle.iter().enumerate() {
        pos[v] = i;
    }
    // edge i joins cycle[i] and cycle[i+1]
    let slots: Vec<Vec<usize>> = pool
        .iter()
        .map(|&s| {
            let mut out = Vec::new();
            for &a in inst.h().neighbors(s) {
                if pos[a] == usize::MAX {
                    continue;
                }
                for (i, b) in [(pos[a], cycle[(pos[a] + 1) % l]), ((pos[a] + l - 1) % l, cycle[(pos[a] + l - 1) % l])] {
                    if inst.g_adjacent(a, b) && inst.h_adjacent(s, b) && !unavailable.contains(&edge(a, b)) {
                        out.push(i);
                    }
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    let mut owner = vec![usize::MAX; l];
    fn try_kuhn(v: usize, slots: &[Vec<usize>], owner: &mut [usize], seen: &mut [bool]) -> bool {
        for &i in &slots[v] {
            if seen[i] {
                continue;
            }
            seen[i] = true;
            if owner[i] == usize::MAX || try_kuhn(owner[i], slots, owner, seen) {
                owner[i] = v;
                return true;
            }
        }
        false
    }
    for v in 0..pool.len() {
        let mut seen = vec![false; l];
        try_kuhn(v, &slots, &mut owner, &mut seen);
    }
    let mut out: Vec<(Edge, VertexId)> = (0..l)
        .filter(|&i| owner[i] != usize::MAX)
        .map(|i| (edge(cycle[i], cycle[(i + 1) % l]), pool[owner[i]]))
        .collect();
    out.sort_by_key(|&(_, v)| v);
    out
}

/// Outcome of the edge-count certificate against a Hamiltonian cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum Obstruction {
    /// Too few `G`-edges inside the large side: no Hamiltonian cycle exists.
    NonHamiltonianCertified { inside: usize, needed: usize },
    /// The count does not rule one out.
    Inconclusive { inside: usize, needed: usize },
}

impl Obstruction {
    pub fn is_certified(&self) -> bool {
        matches!(self, Obstruction::NonHamiltonianCertified { .. })
    }
}

/// With `H` bipartite on `(V ∖ B, B)`, a Hamiltonian cycle of `H ∪ G` uses at
/// most `2|V ∖ B|` edges leaving `B`, so it needs at least `n − 2|V ∖ B|`
/// `G`-edges inside `B`. The requirement is taken as `⌈(1−2α)n⌉`, capped by
/// the exact count.
pub fn bipartite_obstruction(g: &StaticGraph, in_b: &[bool], alpha: f64) -> Obstruction {
    let n = g.n();
    let small = in_b.iter().filter(|&&b| !b).count();
    let exact = n.saturating_sub(2 * small);
    let nominal = ((1.0 - 2.0 * alpha) * n as f64 - 1e-9).ceil().max(0.0) as usize;
    let needed = nominal.min(exact);
    let inside = g.edges_within(in_b);
    if inside < needed {
        Obstruction::NonHamiltonianCertified { inside, needed }
    } else {
        Obstruction::Inconclusive { inside, needed }
    }
}
