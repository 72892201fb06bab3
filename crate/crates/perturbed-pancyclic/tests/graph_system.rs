use std::collections::{HashMap, VecDeque};

use perturbed_pancyclic::graph::{
    edge, read_edge_list, write_edge_list, ComponentKind, Edge, Multigraph, PathCycleSystem, StaticGraph, SystemError,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Components recomputed from scratch: (sorted members, is_cycle, sorted ends).
fn rebuild(sys: &PathCycleSystem) -> Vec<(Vec<usize>, bool, Vec<usize>)> {
    let n = sys.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for v in 0..n {
        if !sys.is_active(v) || seen[v] {
            continue;
        }
        let mut members = vec![];
        let mut queue = VecDeque::from([v]);
        seen[v] = true;
        while let Some(x) = queue.pop_front() {
            members.push(x);
            for y in sys.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        members.sort_unstable();
        let mut ends: Vec<usize> = members.iter().copied().filter(|&x| sys.degree(x) < 2).collect();
        let cycle = ends.is_empty();
        if ends.len() == 1 {
            ends.push(ends[0]);
        }
        out.push((members, cycle, ends));
    }
    out.sort();
    out
}

fn indexed(sys: &PathCycleSystem) -> Vec<(Vec<usize>, bool, Vec<usize>)> {
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..sys.n() {
        if let Some(id) = sys.component_id(v) {
            groups.entry(id).or_default().push(v);
        }
    }
    let mut out: Vec<_> = groups
        .into_values()
        .map(|mut members| {
            members.sort_unstable();
            let view = sys.component(members[0]).unwrap();
            assert_eq!(view.size, members.len());
            let mut ends = match view.ends {
                Some((a, b)) => vec![a, b],
                None => vec![],
            };
            ends.sort_unstable();
            (members, view.kind == ComponentKind::Cycle, ends)
        })
        .collect();
    out.sort();
    out
}

fn bfs_dist(sys: &PathCycleSystem, s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; sys.n()];
    if !sys.is_active(s) {
        return dist;
    }
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        for y in sys.neighbors(x) {
            if dist[y].is_none() {
                dist[y] = Some(dist[x].unwrap() + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

fn assert_matches_oracle(sys: &PathCycleSystem) {
    sys.audit().unwrap();
    let oracle = rebuild(sys);
    assert_eq!(indexed(sys), oracle);
    let cycles = oracle.iter().filter(|c| c.1).count();
    assert_eq!(sys.cycle_count(), cycles);
    assert_eq!(sys.path_count(), oracle.len() - cycles);
    for v in 0..sys.n() {
        assert!(sys.degree(v) <= 2);
    }
}

#[test]
fn insert_joins_and_closes() {
    let mut sys = PathCycleSystem::new(6);
    sys.insert_edge(0, 1).unwrap();
    let (a, b) = sys.component(0).unwrap().ends.unwrap();
    assert_eq!((a.min(b), a.max(b)), (0, 1));
    for (u, v) in [(1, 2), (3, 4), (4, 5)] {
        sys.insert_edge(u, v).unwrap();
    }
    assert_eq!(sys.component_count(), 2);
    sys.insert_edge(2, 3).unwrap();
    assert_eq!(sys.component_count(), 1);
    assert_eq!(sys.component(0).unwrap().kind, ComponentKind::Path);
    assert_eq!(sys.component_vertices(0).len(), 6);
    assert_matches_oracle(&sys);
    sys.insert_edge(5, 0).unwrap();
    assert_eq!(sys.component(3).unwrap().kind, ComponentKind::Cycle);
    assert_eq!(sys.dist_along(0, 3), Some(3));
    assert_matches_oracle(&sys);
}

#[test]
fn insert_errors() {
    let mut sys = PathCycleSystem::from_edges(4, [(0, 1), (1, 2)]).unwrap();
    assert_eq!(sys.insert_edge(1, 3), Err(SystemError::DegreeViolation(1)));
    assert_eq!(sys.insert_edge(2, 2), Err(SystemError::Loop(2)));
    let mut two = PathCycleSystem::from_edges(2, [(0, 1)]).unwrap();
    assert_eq!(two.insert_edge(1, 0), Err(SystemError::ShortCycle(1, 0)));
    sys.deactivate(3).unwrap();
    assert_eq!(sys.insert_edge(2, 3), Err(SystemError::Inactive(3)));
    assert_eq!(sys.deactivate(0), Err(SystemError::NonIsolated(0)));
    assert_eq!(sys.delete_edge(0, 2), Err(SystemError::MissingEdge(0, 2)));
}

#[test]
fn delete_opens_and_splits() {
    let mut cyc = PathCycleSystem::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
    cyc.delete_edge(2, 3).unwrap();
    let view = cyc.component(0).unwrap();
    assert_eq!(view.kind, ComponentKind::Path);
    assert_eq!(view.size, 5);
    assert_matches_oracle(&cyc);

    let mut path = PathCycleSystem::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    path.delete_edge(1, 2).unwrap();
    assert_eq!(path.path_count(), 2);
    assert_eq!(path.dist_along(0, 1), Some(1));
    assert_eq!(path.dist_along(1, 2), None);
    assert_matches_oracle(&path);
}

#[test]
fn degenerate_paths_list_their_vertex_twice() {
    let mut sys = PathCycleSystem::new(3);
    assert_eq!(sys.component(1).unwrap().ends, Some((1, 1)));
    assert_eq!(sys.component(1).unwrap().kind, ComponentKind::Isolated);
    sys.deactivate(1).unwrap();
    assert!(sys.component(1).is_none());
    assert_eq!(sys.path_count(), 2);
    sys.reactivate(1).unwrap();
    assert_matches_oracle(&sys);
}

#[test]
fn splice_is_all_or_nothing() {
    let mut sys = PathCycleSystem::from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
    let before = indexed(&sys);
    assert_eq!(sys.splice(&[], &[]).unwrap().components(), 0);
    // second insertion pushes vertex 1 to degree 3
    let err = sys.splice(&[(0, 1)], &[(2, 3), (1, 4)]).unwrap_err();
    assert_eq!(err.stage, "add");
    assert_eq!(indexed(&sys), before);
    let err = sys.splice(&[(0, 1), (0, 2)], &[]).unwrap_err();
    assert_eq!(err.stage, "remove");
    assert_eq!(indexed(&sys), before);
    let delta = sys.splice(&[(1, 2)], &[(2, 3)]).unwrap();
    assert_eq!((delta.paths, delta.cycles), (0, 0));
    assert_matches_oracle(&sys);
}

#[test]
fn random_operation_sequence_matches_rebuild() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..4 {
        let n = [12, 25, 40, 7][round];
        let mut sys = PathCycleSystem::new(n);
        for _ in 0..10_000 {
            match rng.random_range(0..10) {
                0..=4 => {
                    let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
                    let ok_expected = u != v
                        && sys.is_active(u)
                        && sys.is_active(v)
                        && sys.degree(u) < 2
                        && sys.degree(v) < 2
                        && !(sys.same_component(u, v) && sys.component(u).unwrap().size < 3);
                    assert_eq!(sys.insert_edge(u, v).is_ok(), ok_expected);
                }
                5..=7 => {
                    let edges: Vec<Edge> = sys.edges().collect();
                    if !edges.is_empty() {
                        let (u, v) = edges[rng.random_range(0..edges.len())];
                        sys.delete_edge(u, v).unwrap();
                    }
                }
                8 => {
                    let v = rng.random_range(0..n);
                    let ok = sys.is_active(v) && sys.degree(v) == 0;
                    assert_eq!(sys.deactivate(v).is_ok(), ok);
                }
                _ => {
                    let v = rng.random_range(0..n);
                    if !sys.is_active(v) {
                        sys.reactivate(v).unwrap();
                    }
                }
            }
            assert_matches_oracle(&sys);
        }
    }
}

proptest! {
    #[test]
    fn dist_along_equals_bfs(seed in any::<u64>(), n in 3usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sys = PathCycleSystem::new(n);
        for _ in 0..4 * n {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            let _ = sys.insert_edge(u, v);
            if rng.random_bool(0.2) {
                let edges: Vec<Edge> = sys.edges().collect();
                if let Some(&(a, b)) = edges.first() {
                    sys.delete_edge(a, b).unwrap();
                }
            }
        }
        for s in 0..n {
            let dist = bfs_dist(&sys, s);
            for t in 0..n {
                prop_assert_eq!(sys.dist_along(s, t), dist[t]);
            }
        }
    }

    #[test]
    fn splice_failure_restores_state(seed in any::<u64>()) {
        let n = 14;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sys = PathCycleSystem::new(n);
        for _ in 0..30 {
            let _ = sys.insert_edge(rng.random_range(0..n), rng.random_range(0..n));
        }
        let before = indexed(&sys);
        let edges: Vec<Edge> = sys.edges().collect();
        let remove: Vec<Edge> = edges.iter().copied().filter(|_| rng.random_bool(0.3)).collect();
        let add: Vec<Edge> = (0..3).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
        if sys.splice(&remove, &add).is_err() {
            prop_assert_eq!(indexed(&sys), before);
        }
        sys.audit().unwrap();
    }
}

/// Every system on `n` labelled-consecutively vertices up to isomorphism:
/// a multiset of path sizes (≥ 1) and cycle sizes (≥ 3).
fn all_systems(n: usize) -> Vec<PathCycleSystem> {
    fn parts(rest: usize, max: (usize, bool), acc: &mut Vec<(usize, bool)>, out: &mut Vec<Vec<(usize, bool)>>) {
        if rest == 0 {
            out.push(acc.clone());
            return;
        }
        for size in (1..=rest).rev() {
            for cycle in [true, false] {
                if cycle && size < 3 {
                    continue;
                }
                if (size, cycle) > max {
                    continue;
                }
                acc.push((size, cycle));
                parts(rest - size, (size, cycle), acc, out);
                acc.pop();
            }
        }
    }
    let mut shapes = Vec::new();
    parts(n, (n, true), &mut Vec::new(), &mut shapes);
    shapes
        .into_iter()
        .map(|shape| {
            let mut edges = Vec::new();
            let mut base = 0;
            for (size, cycle) in shape {
                for i in 0..size.saturating_sub(1) {
                    edges.push((base + i, base + i + 1));
                }
                if cycle {
                    edges.push((base + size - 1, base));
                }
                base += size;
            }
            PathCycleSystem::from_edges(n, edges).unwrap()
        })
        .collect()
}

/// Non-degenerate subpaths as vertex sequences.
fn subpaths(sys: &PathCycleSystem) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut done = vec![false; sys.n()];
    for v in 0..sys.n() {
        if done[v] {
            continue;
        }
        let order = sys.component_vertices(v);
        for &x in &order {
            done[x] = true;
        }
        let k = order.len();
        let cycle = sys.component(v).unwrap().kind == ComponentKind::Cycle;
        for start in 0..k {
            let max_len = if cycle { k } else { k - start };
            for len in 2..=max_len {
                out.push((0..len).map(|i| order[(start + i) % k]).collect());
            }
        }
    }
    out
}

fn path_edges(p: &[usize]) -> Vec<Edge> {
    p.windows(2).map(|w| edge(w[0], w[1])).collect()
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

#[test]
fn splice_deltas_obey_path_cycle_bounds_exhaustively() {
    let mut checked = 0usize;
    for n in 2..=10 {
        for base in all_systems(n) {
            let subs = subpaths(&base);
            for (i, p1) in subs.iter().enumerate() {
                for p2 in &subs[i + 1..] {
                    if !disjoint(p1, p2) {
                        continue;
                    }
                    for &x in [p1[0], p1[p1.len() - 1]].iter() {
                        for &y in [p2[0], p2[p2.len() - 1]].iter() {
                            if base.has_edge(x, y) {
                                continue;
                            }
                            let mut sys = base.clone();
                            let mut remove = path_edges(p1);
                            remove.extend(path_edges(p2));
                            let before = (sys.nondegenerate_path_count(), sys.cycle_count());
                            sys.splice(&remove, &[(x, y)]).unwrap();
                            assert!(sys.nondegenerate_path_count() <= before.0 + 1);
                            assert!(sys.cycle_count() <= before.1 + 1);
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 10_000);
}

/// Outcome of rerouting `x-z`, `y-z'` after deleting three subpaths, for every
/// small configuration where `x, y` are the ends of a subpath of a cycle.
struct Reroute {
    rest_outside_cycle: bool,
    x_z: bool,
    y_zp: bool,
    z_zp: bool,
    crossed: bool,
    new_cycle: bool,
}

fn all_reroutes(max_n: usize, mut visit: impl FnMut(Reroute)) {
    for n in 6..=max_n {
        for base in all_systems(n) {
            let subs = subpaths(&base);
            let in_cycle: Vec<&Vec<usize>> = subs
                .iter()
                .filter(|p| base.component(p[0]).unwrap().kind == ComponentKind::Cycle)
                .collect();
            for p3 in in_cycle {
                let (x, y) = (p3[0], p3[p3.len() - 1]);
                for p1 in subs.iter().filter(|p| disjoint(p, p3)) {
                    for &z in [p1[0], p1[p1.len() - 1]].iter() {
                        if base.has_edge(x, z) {
                            continue;
                        }
                        for p2 in subs.iter().filter(|p| disjoint(p, p3) && disjoint(p, p1)) {
                            for &zp in [p2[0], p2[p2.len() - 1]].iter() {
                                if base.has_edge(y, zp) {
                                    continue;
                                }
                                let mut sys = base.clone();
                                let mut remove = path_edges(p1);
                                remove.extend(path_edges(p2));
                                remove.extend(path_edges(p3));
                                sys.splice(&remove, &[]).unwrap();
                                let same = |a, b| sys.same_component(a, b);
                                let facts = (same(x, z), same(y, zp), same(z, zp), same(x, zp) && same(y, z));
                                sys.splice(&[], &[(x, z), (y, zp)]).unwrap();
                                let new_cycle = [x, y].iter().any(|&v| {
                                    sys.component(v).unwrap().kind == ComponentKind::Cycle
                                });
                                visit(Reroute {
                                    rest_outside_cycle: !base.same_component(p1[0], x) && !base.same_component(p2[0], x),
                                    x_z: facts.0,
                                    y_zp: facts.1,
                                    z_zp: facts.2,
                                    crossed: facts.3,
                                    new_cycle,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
}

/// With the two rerouting subpaths outside the cycle through `x, y`, a new
/// cycle needs `x~z`, `y~z'` or `z~z'`.
#[test]
fn new_cycles_need_a_shared_component_exhaustively() {
    let mut checked = 0usize;
    all_reroutes(10, |r| {
        if r.rest_outside_cycle {
            assert!(!r.new_cycle || r.x_z || r.y_zp || r.z_zp);
            checked += 1;
        }
    });
    assert!(checked > 10_000);
}

/// Without that restriction the crossed pairing `x~z'`, `y~z` also closes a cycle.
#[test]
fn crossed_pairing_is_the_only_other_way_to_close_a_cycle() {
    let (mut checked, mut crossed_only) = (0usize, 0usize);
    all_reroutes(10, |r| {
        let listed = r.x_z || r.y_zp || r.z_zp;
        assert!(!r.new_cycle || listed || r.crossed);
        if r.new_cycle && !listed {
            crossed_only += 1;
        }
        checked += 1;
    });
    assert!(checked > 10_000);
    assert!(crossed_only > 0);

    // smallest instance: a 6-cycle cut into 1-2, 3-4, 5-0
    let mut sys = PathCycleSystem::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
    sys.splice(&[(0, 1), (2, 3), (4, 5)], &[]).unwrap();
    assert!(!sys.same_component(0, 2) && !sys.same_component(1, 5) && !sys.same_component(2, 5));
    sys.splice(&[], &[(0, 2), (1, 5)]).unwrap();
    assert_eq!(sys.component(0).unwrap().kind, ComponentKind::Cycle);
}

#[test]
fn edge_list_round_trip() {
    let g = StaticGraph::from_edges(5, [(0, 1), (3, 1), (2, 4)]).unwrap();
    let mut buf = Vec::new();
    write_edge_list(&g, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf.clone()).unwrap(), "5 3\n0 1\n1 3\n2 4\n");
    assert_eq!(read_edge_list(&buf[..]).unwrap(), g);
    assert!(read_edge_list("3 1\n2 1\n".as_bytes()).is_err());
    assert!(read_edge_list("3 2\n0 1\n".as_bytes()).is_err());
}

#[test]
fn static_graph_basics() {
    let k4 = StaticGraph::complete(4);
    assert_eq!(k4.edge_count(), 6);
    assert!(k4.has_edge(3, 0));
    assert!(StaticGraph::from_edges(3, [(0, 0)]).is_err());
    assert!(StaticGraph::from_edges(3, [(0, 1), (1, 0)]).is_err());
    let a = StaticGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
    let b = StaticGraph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
    let u = a.union(&b);
    assert_eq!(u.edge_count(), 3);
    assert_eq!(u.neighbors(1), &[0, 2]);
    let m = u.bit_matrix();
    assert!(m.get(2, 1) && !m.get(0, 3));
}

#[test]
fn multigraph_degrees_count_loops_twice() {
    let mut g = Multigraph::new(2);
    g.add_edge(0, 0);
    g.add_edge(0, 1);
    g.add_edge(1, 0);
    assert_eq!(g.degree(0), 4);
    assert_eq!(g.loop_count(), 1);
    assert_eq!(g.parallel_excess(), 1);
    assert!(!g.is_simple());
    assert_eq!(g.component_count(), 1);
}
