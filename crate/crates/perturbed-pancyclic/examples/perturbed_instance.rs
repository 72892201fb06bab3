//! Builds `H ∪ G` for each family of `H`, writes it to disk and reads it back.

use perturbed_pancyclic::config_model::trial_rng;
use perturbed_pancyclic::perturb::{build_instance, make_extremal, read_instance, write_instance, ExtremalSpec, Family, InstanceMeta};

fn main() {
    let n = 200;
    let alpha = 0.4;
    let dir = std::env::temp_dir().join("perturbed-pancyclic-example");
    for name in ["complete", "unbalanced-bipartite", "logn-bipartite", "min-degree-random"] {
        let family = Family::parse(name, alpha).unwrap();
        let mut rng = trial_rng(7, 0);
        let h = make_extremal(ExtremalSpec { family, n }, &mut rng).unwrap();
        let inst = build_instance(h, 2, &mut rng).unwrap();
        println!(
            "{name:>22}: |E(H)| = {:>5}, min deg H = {:>3}, |E(G)| = {}, |E(H ∪ G)| = {}",
            inst.h().edge_count(),
            (0..n).map(|v| inst.h().degree(v)).min().unwrap(),
            inst.g().edge_count(),
            inst.union().edge_count()
        );
        let meta = InstanceMeta { n, d: 2, alpha, seed: 7, family: name.into() };
        let path = dir.join(name);
        write_instance(&path, &inst, &meta).unwrap();
        let (back, _) = read_instance(&path).unwrap();
        assert_eq!(back.g(), inst.g());
    }
    println!("instances written under {}", dir.display());
}
