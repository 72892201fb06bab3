//! Exhaustive cycle-length search for small graphs and the cycle validator.

use perturbed_pancyclic::graph::StaticGraph;
use perturbed_pancyclic::verify::{is_pancyclic_bruteforce, validate_cycle, CycleCertificate};

fn main() {
    let wheel = StaticGraph::from_edges(7, (1..7).map(|i| (0, i)).chain((1..7).map(|i| (i, i % 6 + 1)))).unwrap();
    let lens = is_pancyclic_bruteforce(&wheel).unwrap();
    println!("wheel W6: pancyclic {}, Hamiltonian {}", lens.is_pancyclic(), lens.is_hamiltonian());

    let cube_edges = (0..8usize).flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b)))).filter(|&(u, v)| u < v);
    let cube = StaticGraph::from_edges(8, cube_edges).unwrap();
    let lens = is_pancyclic_bruteforce(&cube).unwrap();
    let found: Vec<usize> = (3..=8).filter(|&k| lens.contains(k)).collect();
    println!("cube Q3: cycle lengths {found:?}, pancyclic {}", lens.is_pancyclic());

    let good = CycleCertificate::new(vec![0, 1, 3, 2, 6, 7, 5, 4]);
    let bad = CycleCertificate::new(vec![0, 1, 2, 3]);
    println!("{:?}: {:?}", good.vertices, validate_cycle(&cube, &good));
    println!("{:?}: {:?}", bad.vertices, validate_cycle(&cube, &bad));
}
