//! Expected component counts of a random `K_r`-factor added to
//! `K_(αn, (1-α)n)`, and the `α` at which they reach `αn`.

use perturbed_pancyclic::verify::{kr_expected_components, kr_threshold_root};

fn main() {
    let n = 1200;
    for r in 1..=8 {
        let root = kr_threshold_root(r);
        let (by_s, total) = kr_expected_components(n, r, root);
        println!("r = {r}: root {root:.6}, E[components] at root {total:8.2} vs alpha·n {:8.2}", root * n as f64);
        if r == 3 {
            println!("  by number of large-side vertices: {:?}", by_s.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>());
        }
    }
}
