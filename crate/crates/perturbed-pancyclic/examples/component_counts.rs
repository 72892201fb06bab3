//! Monte Carlo component counts of random 2-factors and of `M ∪ G` for a
//! fixed perfect matching `M`, against the exact expectation.

use perturbed_pancyclic::ledger::log_sq;
use perturbed_pancyclic::verify::{
    component_stats, expected_components_2factor, expected_components_2factor_exact, summarize, SamplerSpec,
};

fn main() {
    for n in [10, 100, 1000] {
        let stats = component_stats(&SamplerSpec::TwoFactorConfiguration { n }, 4000, 1).unwrap();
        println!(
            "n = {n:>4}: mean {:.3} (exact {:.3}), variance {:.3}",
            stats.mean_components,
            expected_components_2factor(n),
            stats.var_components
        );
    }
    println!("exact value at n = 5: {}", expected_components_2factor_exact(5));

    let n = 500;
    let m: Vec<usize> = (0..n).map(|v| v ^ 1).collect();
    let stats = component_stats(&SamplerSpec::MatchingUnion { matching: m }, 2000, 2).unwrap();
    let shared: Vec<f64> = stats.samples.iter().map(|s| s.shared_edges as f64).collect();
    println!(
        "M ∪ G at n = {n}: mean cycles {:.2}, shared edges {:?}, bound ln²n = {:.1}",
        stats.mean_cycles,
        summarize(&shared).unwrap(),
        log_sq(n)
    );
}
