use std::collections::{HashMap, HashSet};

use perturbed_pancyclic::config_model::*;
use perturbed_pancyclic::graph::Multigraph;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn all_matchings(points: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if points.is_empty() {
        return vec![vec![]];
    }
    let first = points[0];
    let mut out = Vec::new();
    for k in 1..points.len() {
        let rest: Vec<usize> = points[1..].iter().copied().filter(|&p| p != points[k]).collect();
        for mut m in all_matchings(&rest) {
            m.push((first, points[k]));
            m.sort();
            out.push(m);
        }
    }
    out
}

fn key(cfg: &Configuration) -> Vec<(usize, usize)> {
    let d = cfg.d();
    let mut v: Vec<_> =
        cfg.pairs().iter().map(|(p, q)| (p.owner * d + p.slot, q.owner * d + q.slot)).collect();
    v.sort();
    v
}

fn chi_square_uniform(n: usize, d: usize, samples: usize, seed: u64) {
    let oracle = all_matchings(&(0..n * d).collect::<Vec<_>>());
    let mut counts: HashMap<Vec<(usize, usize)>, usize> = oracle.iter().map(|m| (m.clone(), 0)).collect();
    let mut rng = trial_rng(seed, 0);
    for _ in 0..samples {
        let cfg = sample_configuration(n, d, &mut rng).unwrap();
        *counts.get_mut(&key(&cfg)).expect("sample outside enumeration") += 1;
    }
    let k = oracle.len();
    let expected = samples as f64 / k as f64;
    let stat: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((k - 1) as f64).unwrap().inverse_cdf(1.0 - 1e-3);
    assert!(stat < critical, "(n={n}, d={d}) chi2 = {stat} >= {critical} over {k} cells");
}

#[test]
fn enumeration_counts() {
    assert_eq!(all_matchings(&(0..4).collect::<Vec<_>>()).len(), 3);
    assert_eq!(all_matchings(&(0..6).collect::<Vec<_>>()).len(), 15);
    assert_eq!(all_matchings(&(0..8).collect::<Vec<_>>()).len(), 105);
}

#[test]
fn uniform_over_enumeration() {
    chi_square_uniform(4, 1, 100_000, 1);
    chi_square_uniform(6, 1, 150_000, 2);
    chi_square_uniform(3, 2, 150_000, 3);
    chi_square_uniform(4, 2, 300_000, 4);
}

#[test]
fn k4_frequencies_within_tolerance() {
    let mut rng = trial_rng(11, 0);
    let mut counts: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let samples = 100_000;
    for _ in 0..samples {
        *counts.entry(key(&sample_configuration(4, 1, &mut rng).unwrap())).or_default() += 1;
    }
    assert_eq!(counts.len(), 3);
    for &c in counts.values() {
        assert!((c as f64 / samples as f64 - 1.0 / 3.0).abs() < 0.01);
    }
}

#[test]
fn pivot_rules_preserve_uniformity() {
    let oracle = all_matchings(&(0..8).collect::<Vec<_>>());
    let mut counts: HashMap<Vec<(usize, usize)>, usize> = oracle.iter().map(|m| (m.clone(), 0)).collect();
    let mut rng = trial_rng(5, 0);
    let samples = 210_000;
    for _ in 0..samples {
        let cfg = sample_configuration_with(4, 2, &mut rng, &mut FinishComponentFirst::default()).unwrap();
        *counts.get_mut(&key(&cfg)).unwrap() += 1;
    }
    let expected = samples as f64 / 105.0;
    let stat: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new(104.0).unwrap().inverse_cdf(1.0 - 1e-3);
    assert!(stat < critical);
}

#[test]
fn trivial_samples() {
    let mut rng = trial_rng(0, 0);
    let cfg = sample_configuration(2, 1, &mut rng).unwrap();
    assert_eq!(cfg.pairs(), vec![(Point::new(0, 0), Point::new(1, 0))]);
    assert_eq!(sample_configuration(3, 1, &mut rng), Err(ConfigError::ParityError { n: 3, d: 1 }));
    assert_eq!(sample_configuration(4, 3, &mut rng), Err(ConfigError::UnsupportedDegree(3)));
}

#[test]
fn conditioning() {
    let mut rng = trial_rng(7, 0);
    let p = |o| Point::new(o, 0);
    for _ in 0..100 {
        let cfg = sample_conditioned(4, 1, &[(p(0), p(2))], &mut rng).unwrap();
        assert!(cfg.contains(p(1), p(3)));
    }
    let all = [(p(0), p(3)), (p(1), p(2))];
    let cfg = sample_conditioned(4, 1, &all, &mut rng).unwrap();
    assert_eq!(cfg, Configuration::from_pairs(4, 1, &all).unwrap());
    assert_eq!(
        sample_conditioned(4, 1, &[(p(0), p(1)), (p(1), p(2))], &mut rng),
        Err(ConfigError::ConflictingPairs(p(1)))
    );
}

#[test]
fn empty_conditioning_matches_unconditioned_k4() {
    let mut a = trial_rng(8, 0);
    let mut b = trial_rng(8, 0);
    for _ in 0..1000 {
        assert_eq!(sample_conditioned(4, 1, &[], &mut a).unwrap(), sample_configuration(4, 1, &mut b).unwrap());
    }
}

#[test]
fn projections() {
    let cfg = Configuration::from_pairs(1, 2, &[(Point::new(0, 0), Point::new(0, 1))]).unwrap();
    let g = cfg.project();
    assert_eq!(g.loop_count(), 1);
    assert_eq!(g.degree(0), 2);

    let cfg = Configuration::from_pairs(
        2,
        2,
        &[(Point::new(0, 0), Point::new(1, 0)), (Point::new(0, 1), Point::new(1, 1))],
    )
    .unwrap();
    let g = cfg.project();
    assert_eq!(g.edges().len(), 2);
    assert_eq!(g.parallel_excess(), 1);
    assert!(g.to_simple().is_none());
}

fn degree_audit(g: &Multigraph, d: usize) {
    for v in 0..g.n() {
        assert_eq!(g.degree(v), d);
    }
}

#[test]
fn simple_regular_sampling() {
    let mut rng = trial_rng(9, 0);
    for _ in 0..200 {
        let cfg = sample_configuration(50, 1, &mut rng).unwrap();
        assert_eq!(cfg.project().loop_count(), 0);
        assert!(cfg.project().is_simple());
    }
    let g = sample_simple_regular(200, 2, &mut rng, DEFAULT_MAX_ATTEMPTS).unwrap();
    for v in 0..200 {
        assert_eq!(g.degree(v), 2);
    }
    // disjoint union of cycles: edges = n, and each component is a cycle of length >= 3
    assert_eq!(g.edge_count(), 200);
    let mut seen = vec![false; 200];
    for s in 0..200 {
        if seen[s] {
            continue;
        }
        let (mut prev, mut cur, mut len) = (s, g.neighbors(s)[0], 1);
        seen[s] = true;
        while cur != s {
            seen[cur] = true;
            let next = if g.neighbors(cur)[0] == prev { g.neighbors(cur)[1] } else { g.neighbors(cur)[0] };
            prev = cur;
            cur = next;
            len += 1;
        }
        assert!(len >= 3);
    }
}

#[test]
fn acceptance_rate_d2() {
    let mut rng = trial_rng(10, 0);
    let attempts = 10_000;
    let ok = (0..attempts).filter(|_| sample_configuration(500, 2, &mut rng).unwrap().project().is_simple()).count();
    assert!(ok as f64 / attempts as f64 >= 0.36, "acceptance {ok}/{attempts}");
}

#[test]
fn attempts_exhausted() {
    // n = 1, d = 2 is always a loop
    let mut rng = trial_rng(0, 0);
    assert_eq!(sample_simple_regular(1, 2, &mut rng, 5), Err(ConfigError::AttemptsExhausted(5)));
}

#[test]
fn switch_graph_on_k4_is_connected() {
    let p = |o| Point::new(o, 0);
    let start = Configuration::from_pairs(4, 1, &[(p(0), p(1)), (p(2), p(3))]).unwrap();
    let mut seen: HashSet<Vec<(usize, usize)>> = HashSet::new();
    let mut stack = vec![start];
    while let Some(cfg) = stack.pop() {
        if !seen.insert(key(&cfg)) {
            continue;
        }
        let pairs = cfg.pairs();
        for i in 0..pairs.len() {
            for j in 0..pairs.len() {
                if i != j {
                    for crossing in [false, true] {
                        stack.push(cfg.switch(pairs[i], pairs[j], crossing).unwrap());
                    }
                }
            }
        }
    }
    assert_eq!(seen.len(), 3);
}

#[test]
fn switch_errors() {
    let p = |o| Point::new(o, 0);
    let cfg = Configuration::from_pairs(4, 1, &[(p(0), p(1)), (p(2), p(3))]).unwrap();
    assert_eq!(cfg.switch((p(0), p(2)), (p(1), p(3)), false), Err(ConfigError::NotInConfiguration(p(0), p(2))));
    assert_eq!(cfg.switch((p(0), p(1)), (p(1), p(0)), false), Err(ConfigError::SharedPoint(p(0))));
}

fn diff_count(a: &Configuration, b: &Configuration) -> usize {
    let sa: HashSet<_> = a.pairs().into_iter().collect();
    b.pairs().into_iter().filter(|x| !sa.contains(x)).count()
}

proptest! {
    #[test]
    fn switch_changes_two_pairs_and_inverts(seed in any::<u64>(), n in 2usize..30, d in 1usize..=2, crossing: bool, i in any::<usize>(), j in any::<usize>()) {
        prop_assume!(n * d % 2 == 0 && n * d >= 4);
        let mut rng = trial_rng(seed, 0);
        let cfg = sample_configuration(n, d, &mut rng).unwrap();
        let pairs = cfg.pairs();
        let (i, j) = (i % pairs.len(), j % pairs.len());
        prop_assume!(i != j);
        let ((u1, u2), (v1, v2)) = (pairs[i], pairs[j]);
        let out = cfg.switch((u1, u2), (v1, v2), crossing).unwrap();
        prop_assert_eq!(diff_count(&cfg, &out), 2);
        let back = if crossing { out.switch((u1, v2), (u2, v1), false) } else { out.switch((u1, v1), (u2, v2), false) };
        prop_assert_eq!(back.unwrap(), cfg);
    }

    #[test]
    fn projection_is_regular(seed in any::<u64>(), n in 1usize..60, d in 1usize..=2) {
        prop_assume!(n * d % 2 == 0);
        let mut rng = trial_rng(seed, 3);
        let cfg = sample_configuration(n, d, &mut rng).unwrap();
        degree_audit(&cfg.project(), d);
    }

    #[test]
    fn reveal_counts_match_projection(seed in any::<u64>(), n in 1usize..80) {
        let mut rng = trial_rng(seed, 1);
        let (cfg, k) = reveal_two_factor_components(n, &mut rng).unwrap();
        prop_assert_eq!(k, cfg.project().component_count());
    }

    #[test]
    fn matching_union_counts_match_projection(seed in any::<u64>(), half in 1usize..40) {
        let n = 2 * half;
        let mut rng = trial_rng(seed, 2);
        let sigma = random_perfect_matching(n, &mut rng).unwrap();
        let (cfg, k) = reveal_matching_union_components(&sigma, &mut rng).unwrap();
        for v in 0..n {
            prop_assert_eq!(cfg.partner(Point::new(v, 0)), Point::new(sigma[v], 0));
        }
        prop_assert_eq!(k, cfg.project().component_count());
        prop_assert_eq!(cfg.project().loop_count(), 0);
    }

    #[test]
    fn reproducible(seed in any::<u64>(), trial in any::<u64>()) {
        let a = sample_configuration(40, 2, &mut trial_rng(seed, trial)).unwrap();
        let b = sample_configuration(40, 2, &mut trial_rng(seed, trial)).unwrap();
        prop_assert_eq!(a.dump(), b.dump());
    }
}

#[test]
fn distinct_trials_differ() {
    let a = sample_configuration(40, 2, &mut trial_rng(1, 0)).unwrap();
    let b = sample_configuration(40, 2, &mut trial_rng(1, 1)).unwrap();
    assert_ne!(a, b);
}
