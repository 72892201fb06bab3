//! `G` a perfect matching and `H` a complete unbalanced bipartite graph: the
//! maximum matching of `H` misses many vertices, so the partition and the
//! six rewiring steps build the long cycle.

use perturbed_pancyclic::config_model::trial_rng;
use perturbed_pancyclic::matching::{matching_pancyclic_witness, PipelineConfig};
use perturbed_pancyclic::perturb::{build_instance, complete_bipartite, small_side};

fn main() {
    let (n, alpha) = (2000, 0.45);
    let mut rng = trial_rng(3, 0);
    let inst = build_instance(complete_bipartite(n, small_side(n, alpha)), 1, &mut rng).unwrap();
    let run = matching_pancyclic_witness(&inst, &PipelineConfig::default(), &mut rng);

    println!("route {:?}, {} vertices uncovered by the maximum matching", run.route, run.deficit);
    if let Some(p) = &run.partition {
        println!("parts {:?}, beta {:.4}", p.sizes, p.beta);
        for c in &p.checks {
            println!("  {} {}", c.name, if c.ok { "ok" } else { "FAILED" });
        }
    }
    if let Some(t) = &run.steps {
        for r in &t.reports {
            println!(
                "step {}: removed {:>4}, unavailable {:>4}, paths {:>4}, cycles {:>3}",
                r.step, r.removed, r.unavailable, r.paths, r.cycles
            );
        }
        println!("cases {:?}", t.cases);
    }
    let w = &run.witness;
    println!("{} of {} lengths, Hamiltonian: {}", w.cycles.len(), n - 2, w.cycles.iter().any(|c| c.k == n));
}
