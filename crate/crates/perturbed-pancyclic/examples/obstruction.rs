//! Below the threshold the random matching has too few edges inside the large
//! side of `K_(αn, (1-α)n)`, which rules out a Hamilton cycle by counting.

use perturbed_pancyclic::config_model::trial_rng;
use perturbed_pancyclic::matching::bipartite_obstruction;
use perturbed_pancyclic::perturb::{build_instance, complete_bipartite, small_side};
use perturbed_pancyclic::verify::has_hamilton_cycle_bruteforce;

fn main() {
    let n = 2000;
    for alpha in [0.30, 0.35, 0.40, 0.42, 0.45] {
        let a = small_side(n, alpha);
        let in_b: Vec<bool> = (0..n).map(|v| v >= a).collect();
        let certified = (0..20)
            .filter(|&t| {
                let inst = build_instance(complete_bipartite(n, a), 1, &mut trial_rng(9, t)).unwrap();
                bipartite_obstruction(inst.g(), &in_b, alpha).is_certified()
            })
            .count();
        println!("alpha {alpha:.2}: {certified}/20 certified non-Hamiltonian");
    }

    // small enough to confirm by exhaustive search
    let (n, alpha) = (12, 0.25);
    let a = small_side(n, alpha);
    let in_b: Vec<bool> = (0..n).map(|v| v >= a).collect();
    let inst = build_instance(complete_bipartite(n, a), 1, &mut trial_rng(1, 0)).unwrap();
    let verdict = bipartite_obstruction(inst.g(), &in_b, alpha);
    let ham = has_hamilton_cycle_bruteforce(inst.union()).unwrap();
    println!("n = 12: {verdict:?}, exhaustive search finds a Hamilton cycle: {ham}");
}
