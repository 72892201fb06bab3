use std::collections::HashSet;

use perturbed_pancyclic::config_model::trial_rng;
use perturbed_pancyclic::graph::{Edge, StaticGraph};
use perturbed_pancyclic::ledger::{Selection, Strictness};
use perturbed_pancyclic::matching::blossom::max_matching_size_bruteforce;
use perturbed_pancyclic::matching::*;
use perturbed_pancyclic::perturb::{build_instance, complete_bipartite, small_side, PerturbedInstance};
use perturbed_pancyclic::verify::{validate_cycle, CycleCertificate};
use proptest::prelude::*;
use rand::Rng;

fn graph(n: usize, edges: &[Edge]) -> StaticGraph {
    StaticGraph::from_edges(n, edges.iter().copied()).unwrap()
}

/// Random graph built from the bitmask of all pairs.
fn from_mask(n: usize, mask: u64) -> StaticGraph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((u, v));
            }
            bit += 1;
        }
    }
    graph(n, &edges)
}

/// Bipartite-like `H`: a small side of size `a` almost complete to the rest,
/// random edges inside the small side and a few inside the large side.
fn deficient_instance<R: Rng>(n: usize, alpha: f64, rng: &mut R) -> StaticGraph {
    let need = (alpha * n as f64).ceil() as usize;
    let top = (n - (n as f64).sqrt().ceil() as usize - 8) / 2;
    let a = rng.random_range(need..=top.max(need));
    let mut edges = Vec::new();
    for v in a..n {
        let mut nb: Vec<usize> = (0..a).filter(|_| rng.random_bool(0.97)).collect();
        if nb.len() < need {
            nb = (0..a).collect();
        }
        edges.extend(nb.into_iter().map(|u| (u, v)));
    }
    for u in 0..a {
        for w in u + 1..a {
            if rng.random_bool(0.3) {
                edges.push((u, w));
            }
        }
    }
    for _ in 0..rng.random_range(0..4) {
        let (x, y) = (rng.random_range(a..n), rng.random_range(a..n));
        if x != y {
            edges.push((x, y));
        }
    }
    StaticGraph::from_edges_dedup(n, edges).unwrap()
}

#[test]
fn small_matchings() {
    assert_eq!(max_matching(&graph(3, &[(0, 1), (1, 2)])).len(), 1);
    assert_eq!(max_matching(&complete_bipartite(10, 4)).len(), 4);
    assert_eq!(max_matching(&StaticGraph::complete(7)).len(), 3);
    // odd cycle with a pendant needs a blossom
    let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (2, 5)]);
    assert_eq!(max_matching(&g).len(), 3);
    assert!(max_matching(&StaticGraph::empty(5)).is_empty());
}

#[test]
fn matching_agrees_with_bruteforce_up_to_eight() {
    for n in 1..=6usize {
        let pairs = n * (n - 1) / 2;
        for mask in 0..1u64 << pairs {
            let g = from_mask(n, mask);
            let m = max_matching(&g);
            m.check_in(&g).unwrap();
            assert_eq!(m.len(), max_matching_size_bruteforce(&g), "n={n} mask={mask}");
        }
    }
    let mut rng = trial_rng(7, 0);
    for n in 7..=8usize {
        let pairs = n * (n - 1) / 2;
        for _ in 0..3000 {
            let g = from_mask(n, rng.random::<u64>() & ((1u64 << pairs) - 1));
            assert_eq!(max_matching(&g).len(), max_matching_size_bruteforce(&g));
        }
    }
}

#[test]
fn pruning_and_greedy_start_do_not_change_size() {
    let mut rng = trial_rng(3, 1);
    for _ in 0..40 {
        let n = rng.random_range(20..60);
        let p = rng.random_range(0.02..0.3);
        let edges: Vec<Edge> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.random_bool(p)).collect();
        let g = graph(n, &edges);
        let sizes: HashSet<usize> = [(true, true), (true, false), (false, true), (false, false)]
            .into_iter()
            .map(|(greedy_start, prune)| max_matching_with(&g, MatchingOptions { greedy_start, prune }).len())
            .collect();
        assert_eq!(sizes.len(), 1);
    }
}

#[test]
fn matching_rejects_bad_edges() {
    assert_eq!(Matching::from_edges(4, &[(0, 1), (1, 2)]), Err(MatchingError::Overlap(1)));
    assert_eq!(Matching::from_edges(4, &[(0, 0)]), Err(MatchingError::BadEdge(0, 0)));
    let m = Matching::from_edges(4, &[(0, 2)]).unwrap();
    assert_eq!(m.check_in(&graph(4, &[(0, 1)])), Err(MatchingError::NotInGraph(0, 2)));
    assert_eq!(m.covered(), 2);
    assert_eq!(m.partner(2), Some(0));
}

#[test]
fn partition_of_unbalanced_bipartite() {
    let n = 400;
    let alpha = 0.45;
    let a = small_side(n, alpha);
    let h = complete_bipartite(n, a);
    let m = max_matching(&h);
    let p = partition(&h, &m, alpha, default_beta(n, alpha)).unwrap();
    let checks = check_partition_properties(&h, &m, &p);
    assert!(checks.iter().all(|c| c.ok), "{checks:?}");
    assert_eq!(p.size(Part::B1), a);
    assert_eq!(p.size(Part::B2), a);
    assert_eq!(p.size(Part::R), n - 2 * a);
    // level 0 holds the uncovered vertices, which all land in R here
    let uncovered: Vec<usize> = (0..n).filter(|&v| !m.is_covered(v)).collect();
    assert_eq!(p.levels[0].second, uncovered);
    assert!(p.stop as f64 <= 1.0 / p.beta);
}

#[test]
fn partition_on_random_deficient_instances() {
    let mut done = 0;
    let mut seed = 0;
    while done < 100 {
        let mut rng = trial_rng(seed, 5);
        seed += 1;
        let n = rng.random_range(300..=600);
        let alpha = rng.random_range(0.3..0.45);
        let h = deficient_instance(n, alpha, &mut rng);
        let m = max_matching(&h);
        assert!((n - m.covered()) as f64 >= (n as f64).sqrt(), "generator keeps the deficit");
        let p = partition(&h, &m, alpha, default_beta(n, alpha)).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let checks = check_partition_properties(&h, &m, &p);
        assert!(checks.iter().all(|c| c.ok), "seed {seed}: {checks:?}");
        let uncovered: Vec<usize> = (0..n).filter(|&v| !m.is_covered(v)).collect();
        assert_eq!(p.levels[0].second, uncovered);
        done += 1;
    }
}

#[test]
fn partition_preconditions() {
    let h = complete_bipartite(400, 180);
    let m = max_matching(&h);
    assert!(matches!(partition(&h, &m, 0.45, 0.3), Err(PartitionError::Precondition(_))));
    assert!(matches!(partition(&h, &m, 0.45, 0.01), Err(PartitionError::Precondition(_))));
    assert!(matches!(partition(&h, &m, 0.5, 0.2), Err(PartitionError::Precondition(_))));
    let full = StaticGraph::complete(100);
    let fm = max_matching(&full);
    assert!(matches!(partition(&full, &fm, 0.45, 0.2), Err(PartitionError::Precondition(_))));
    // a non-maximum matching trips a claim check or the deficit test
    let half = Matching::from_edges(400, &m.edges()[..100]).unwrap();
    assert!(partition(&h, &half, 0.45, 0.2).is_err());
}

fn bipartite_instance(n: usize, alpha: f64, seed: u64) -> PerturbedInstance {
    let mut rng = trial_rng(seed, 0);
    build_instance(complete_bipartite(n, small_side(n, alpha)), 1, &mut rng).unwrap()
}

#[test]
fn six_steps_on_unbalanced_bipartite() {
    let n = 2000;
    let inst = bipartite_instance(n, 0.45, 11);
    let m = max_matching(inst.h());
    let p = partition(inst.h(), &m, 0.45, default_beta(n, 0.45)).unwrap();
    let mut rng = trial_rng(11, 1);
    let cfg = PipelineConfig { strictness: Strictness::Experiment, ..Default::default() };
    let (out, trace) = run_six_steps(&inst, &p, &m, &cfg, &mut rng);
    let out = out.unwrap();
    assert_eq!(trace.reports.len(), 6);
    for r in &trace.reports {
        assert!(r.checks.iter().all(|c| c.ok), "step {}: {:?}", r.step, r.checks);
    }
    let t = trace.absorbers;
    assert_eq!(out.path.vertices.len(), 4 * t);
    assert_eq!(out.cycle.len() + out.removed.len(), n);
    let cert = CycleCertificate::new(out.cycle.clone());
    validate_cycle(inst.union(), &cert).unwrap();
    let removed: HashSet<usize> = out.removed.iter().copied().collect();
    assert!(out.path.reserve.iter().all(|u| removed.contains(u)));
    for (&u, &(x, y)) in out.path.reserve.iter().zip(&out.path.absorbing) {
        assert!(inst.h_adjacent(u, x) && inst.h_adjacent(u, y) && inst.g_adjacent(x, y));
    }
}

#[test]
fn step_one_is_a_noop_without_shared_edges() {
    // a 2000-vertex instance is unlikely to have no shared edge, so search a few seeds
    let n = 600;
    for seed in 0..40 {
        let inst = bipartite_instance(n, 0.45, seed);
        let m = max_matching(inst.h());
        if m.edges().iter().any(|&(a, b)| inst.g_adjacent(a, b)) {
            continue;
        }
        let p = partition(inst.h(), &m, 0.45, default_beta(n, 0.45)).unwrap();
        let (_, trace) = run_six_steps(&inst, &p, &m, &PipelineConfig::default(), &mut trial_rng(seed, 2));
        let first = &trace.reports[0];
        assert_eq!((first.removed, first.unavailable, first.blocked), (0, 0, 0));
        assert_eq!(trace.count("1:shared"), 0);
        return;
    }
    panic!("no seed without shared edges");
}

#[test]
fn pipeline_end_to_end_validates_every_cycle() {
    let inst = bipartite_instance(1000, 0.45, 3);
    let run = matching_pancyclic_witness(&inst, &PipelineConfig::default(), &mut trial_rng(3, 9));
    assert_eq!(run.route, Route::SixSteps);
    assert!(run.witness.is_complete(), "{:?}", run.witness.failures.first());
    for c in &run.witness.cycles {
        validate_cycle(inst.union(), c).unwrap();
        assert_eq!(c.vertices.len(), c.k);
    }
}

#[test]
fn pipeline_is_deterministic_per_seed() {
    let inst = bipartite_instance(800, 0.45, 4);
    let cfg = PipelineConfig { selection: Selection::Random, ..Default::default() };
    let a = matching_pancyclic_witness(&inst, &cfg, &mut trial_rng(4, 1));
    let b = matching_pancyclic_witness(&inst, &cfg, &mut trial_rng(4, 1));
    assert_eq!(a.witness.cycles, b.witness.cycles);
    assert_eq!(a.steps, b.steps);
}

#[test]
fn near_perfect_matching_uses_augmented_route() {
    let mut rng = trial_rng(5, 0);
    let inst = build_instance(StaticGraph::complete(200), 1, &mut rng).unwrap();
    let run = matching_pancyclic_witness(&inst, &PipelineConfig::default(), &mut rng);
    assert_eq!(run.route, Route::MatchingAugmented);
    assert_eq!(run.deficit, 0);
    assert!(run.witness.is_complete());
}

#[test]
fn wrong_degree_fails_every_length() {
    let mut rng = trial_rng(5, 0);
    let inst = build_instance(complete_bipartite(60, 27), 2, &mut rng).unwrap();
    let run = matching_pancyclic_witness(&inst, &PipelineConfig::default(), &mut rng);
    assert_eq!(run.witness.failures.len(), 58);
    assert!(run.witness.cycles.is_empty());
}

#[test]
fn strict_mode_stops_on_threshold_margin() {
    let inst = bipartite_instance(1000, 0.42, 1);
    let cfg = PipelineConfig { strictness: Strictness::Strict, ..Default::default() };
    let run = matching_pancyclic_witness(&inst, &cfg, &mut trial_rng(1, 1));
    assert!(run.witness.cycles.is_empty());
    assert!(run.witness.failures[0].reason.contains("threshold margin"));
}

#[test]
fn absorber_target_is_capped() {
    let (t, uncapped) = steps::absorber_target(0.01, 0.45, 200);
    assert_eq!(uncapped, 1482);
    assert_eq!(t, 25);
    assert_eq!(steps::absorber_target(0.01, 0.45, 3).0, 2);
}

#[test]
fn regime_labels() {
    assert_eq!(extract::regime(1000, 0.45, 900, 20), "short");
    assert_eq!(extract::regime(1000, 0.45, 900, 21), "middle");
    assert_eq!(extract::regime(1000, 0.45, 900, 900), "long");
    assert_eq!(extract::regime(1000, 0.45, 900, 950), "long");
}

#[test]
fn obstruction_counts_inside_edges() {
    // alpha = 1/2 never certifies
    let g = graph(8, &[(0, 1), (2, 3), (4, 5), (6, 7)]);
    let b: Vec<bool> = (0..8).map(|v| v >= 4).collect();
    assert!(!bipartite_obstruction(&g, &b, 0.5).is_certified());
    // alpha = 1/4: needs 4 edges inside B, G has 3
    let b: Vec<bool> = (0..8).map(|v| v >= 2).collect();
    let verdict = bipartite_obstruction(&g, &b, 0.25);
    assert_eq!(verdict, Obstruction::NonHamiltonianCertified { inside: 3, needed: 4 });
    let g = graph(8, &[(2, 3), (4, 5), (6, 7), (3, 4)]);
    assert!(!bipartite_obstruction(&g, &b, 0.25).is_certified());
}

/// Exhaustive Hamiltonicity for tiny graphs.
fn hamiltonian(g: &StaticGraph) -> bool {
    let n = g.n();
    fn go(g: &StaticGraph, path: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let n = g.n();
        let last = *path.last().unwrap();
        if path.len() == n {
            return g.has_edge(last, path[0]);
        }
        for &w in g.neighbors(last) {
            if !used[w] {
                used[w] = true;
                path.push(w);
                if go(g, path, used) {
                    return true;
                }
                path.pop();
                used[w] = false;
            }
        }
        false
    }
    let mut used = vec![false; n];
    used[0] = true;
    go(g, &mut vec![0], &mut used)
}

#[test]
fn obstruction_certificates_are_confirmed_exhaustively() {
    let mut certified = 0;
    for seed in 0..200 {
        let mut rng = trial_rng(seed, 3);
        let n = 2 * rng.random_range(3..=5);
        let alpha = [0.2, 0.25, 0.3, 0.34][seed as usize % 4];
        let a = small_side(n, alpha).max(1);
        let inst = build_instance(complete_bipartite(n, a), 1, &mut rng).unwrap();
        let b: Vec<bool> = (0..n).map(|v| v >= a).collect();
        if bipartite_obstruction(inst.g(), &b, alpha).is_certified() {
            certified += 1;
            assert!(!hamiltonian(inst.union()), "seed {seed}");
        }
    }
    assert!(certified > 50);
}

#[test]
fn obstruction_at_low_alpha_is_frequent() {
    let n = 2000;
    let alpha = 0.35;
    let a = small_side(n, alpha);
    let b: Vec<bool> = (0..n).map(|v| v >= a).collect();
    let hits = (0..20)
        .filter(|&s| bipartite_obstruction(bipartite_instance(n, alpha, s).g(), &b, alpha).is_certified())
        .count();
    assert!(hits >= 18, "{hits}/20");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blossom_matches_bruteforce(n in 2usize..9, mask in any::<u64>()) {
        let pairs = n * (n - 1) / 2;
        let g = from_mask(n, mask & ((1u64 << pairs) - 1));
        let m = max_matching(&g);
        prop_assert!(m.check_in(&g).is_ok());
        prop_assert_eq!(m.len(), max_matching_size_bruteforce(&g));
    }

    #[test]
    fn partition_parts_pair_up(seed in 0u64..1000) {
        let mut rng = trial_rng(seed, 8);
        let n = rng.random_range(300..=450);
        let alpha = rng.random_range(0.3..0.45);
        let h = deficient_instance(n, alpha, &mut rng);
        let m = max_matching(&h);
        let p = partition(&h, &m, alpha, default_beta(n, alpha)).unwrap();
        prop_assert_eq!(p.size(Part::B1), p.size(Part::B2));
        prop_assert_eq!(p.size(Part::C1), p.size(Part::C2));
        let total: usize = [Part::A, Part::B1, Part::B2, Part::C1, Part::C2, Part::R].iter().map(|&q| p.size(q)).sum();
        prop_assert_eq!(total, n);
    }
}

/// Near-complete bipartite `H` with sparse extra edges on both sides, so the
/// partition has nonempty `C₁, C₂`.
fn mixed_instance(n: usize, seed: u64) -> PerturbedInstance {
    let mut rng = trial_rng(seed, 5);
    let a = rng.random_range(n * 46 / 100..=n * 48 / 100);
    let mut edges = Vec::new();
    for v in a..n {
        edges.extend((0..a).filter(|_| rng.random_bool(0.97)).map(|u| (u, v)));
    }
    for u in 0..a {
        edges.extend((u + 1..a).filter(|_| rng.random_bool(0.05)).map(|w| (u, w)));
    }
    for _ in 0..n / 60 {
        let (x, y) = (rng.random_range(a..n), rng.random_range(a..n));
        if x != y {
            edges.push((x, y));
        }
    }
    let h = StaticGraph::from_edges_dedup(n, edges).unwrap();
    build_instance(h, 1, &mut rng).unwrap()
}

#[test]
fn pipeline_handles_nonempty_c_parts() {
    let mut c_cases = 0;
    let mut six = 0;
    for seed in 0..6 {
        let inst = mixed_instance(1200, seed);
        let run = matching_pancyclic_witness(&inst, &PipelineConfig::default(), &mut trial_rng(seed, 6));
        assert!(run.witness.is_complete(), "seed {seed}: {:?}", run.witness.failures.first());
        if let Some(trace) = &run.steps {
            six += 1;
            c_cases += ["2:3.3", "2:3.4.4", "2:3.4.5", "3:4", "3:5"].iter().map(|t| trace.count(t)).sum::<usize>();
            assert!(trace.reports.iter().flat_map(|r| &r.checks).all(|c| c.ok));
        }
    }
    assert!(six >= 3 && c_cases > 0, "{six} runs, {c_cases} C cases");
}
