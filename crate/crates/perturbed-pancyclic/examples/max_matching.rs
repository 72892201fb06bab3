//! Maximum matching in a general graph, including odd cycles that need blossoms.

use perturbed_pancyclic::graph::StaticGraph;
use perturbed_pancyclic::matching::max_matching;
use perturbed_pancyclic::perturb::complete_bipartite;

fn main() {
    // two triangles joined by an edge: a blossom on each side
    let g = StaticGraph::from_edges(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]).unwrap();
    let m = max_matching(&g);
    println!("two triangles: {} edges {:?}", m.len(), m.edges());

    // Petersen graph has a perfect matching
    let outer = (0..5).map(|i| (i, (i + 1) % 5));
    let spokes = (0..5).map(|i| (i, i + 5));
    let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
    let petersen = StaticGraph::from_edges(10, outer.chain(spokes).chain(inner)).unwrap();
    println!("petersen: {} edges", max_matching(&petersen).len());

    // K_{a, n-a} leaves n - 2a vertices uncovered
    let h = complete_bipartite(1000, 400);
    let m = max_matching(&h);
    println!("K_(400,600): {} edges, {} uncovered", m.len(), 1000 - m.covered());
}
