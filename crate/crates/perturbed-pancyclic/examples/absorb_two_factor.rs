//! Cycles of every length in `H ∪ G` with `G` a random 2-regular graph.

use std::time::Instant;

use perturbed_pancyclic::absorb::{pancyclic_witness, AbsorbConfig};
use perturbed_pancyclic::config_model::trial_rng;
use perturbed_pancyclic::ledger::{Selection, Strictness};
use perturbed_pancyclic::perturb::{build_instance, make_extremal, ExtremalSpec, Family};
use perturbed_pancyclic::verify::validate_cycle;

fn main() {
    let n = 500;
    let mut rng = trial_rng(42, 0);
    let h = make_extremal(ExtremalSpec { family: Family::MinDegreeRandom { alpha: 0.45 }, n }, &mut rng).unwrap();
    let inst = build_instance(h, 2, &mut rng).unwrap();

    let start = Instant::now();
    let cfg = AbsorbConfig { selection: Selection::Random, strictness: Strictness::Experiment, absorbers: None };
    let w = pancyclic_witness(&inst, None, &cfg, &mut rng);
    println!("{} of {} lengths in {:.1?} with {} absorbers", w.cycles.len(), n - 2, start.elapsed(), w.absorbers);
    if let Some(m) = &w.merge {
        println!("merge used {} steps (budget {})", m.steps.len(), m.budget);
    }
    for f in w.failures.iter().take(3) {
        println!("k = {}: {} ({})", f.k, f.reason, f.stage);
    }

    let lens = [3, 4, n / 2, n];
    for c in w.cycles.iter().filter(|c| lens.contains(&c.k)) {
        validate_cycle(inst.union(), c).unwrap();
        println!("k = {:>3}: {:?}…", c.k, &c.vertices[..c.k.min(8)]);
    }
    for e in w.ledger.entries.iter().take(6) {
        println!("ledger {:<28} {:>9.1} <= {:>9.1}", e.name, e.value, e.bound);
    }
}
