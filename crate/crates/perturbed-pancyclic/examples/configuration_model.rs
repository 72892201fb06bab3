//! Samples random perfect matchings from the configuration model and tallies
//! how often each of the 15 matchings on 6 points appears.

use std::collections::BTreeMap;

use perturbed_pancyclic::config_model::{sample_configuration, sample_simple_regular, trial_rng, DEFAULT_MAX_ATTEMPTS};

fn main() {
    let mut rng = trial_rng(1, 0);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let samples = 30_000;
    for _ in 0..samples {
        let cfg = sample_configuration(6, 1, &mut rng).unwrap();
        let mut pairs: Vec<_> = cfg.pairs().iter().map(|(p, q)| (p.owner, q.owner)).collect();
        pairs.sort();
        *counts.entry(format!("{pairs:?}")).or_default() += 1;
    }
    println!("{} distinct matchings, expected 15", counts.len());
    for (m, c) in &counts {
        println!("{m}  {:.4}", *c as f64 / samples as f64);
    }

    // conditioning on simplicity gives a uniform 2-regular graph
    let g = sample_simple_regular(12, 2, &mut rng, DEFAULT_MAX_ATTEMPTS).unwrap();
    println!("\n2-regular graph on 12 vertices: {:?}", g.edges().collect::<Vec<_>>());
}
