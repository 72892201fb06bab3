//! The dynamic linear forest: insert and delete edges, splice with rollback,
//! and query components.

use perturbed_pancyclic::graph::PathCycleSystem;

fn main() {
    // two paths 0-1-2-3 and 4-5-6
    let mut sys = PathCycleSystem::from_edges(8, [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6)]).unwrap();
    println!("paths {}, cycles {}", sys.path_count(), sys.cycle_count());

    // join the ends into one cycle 0..6
    sys.insert_edge(3, 4).unwrap();
    sys.insert_edge(6, 0).unwrap();
    let c = sys.component(0).unwrap();
    println!("component of 0: {:?} of size {}: {:?}", c.kind, c.size, sys.component_vertices(0));
    println!("distance 1 → 5 along it: {:?}", sys.dist_along(1, 5));

    // rotate: drop 2-3, reroute through 7
    let delta = sys.splice(&[(2, 3)], &[(2, 7), (7, 3)]).unwrap();
    println!("after splice: Δpaths {} Δcycles {}, cycle {:?}", delta.paths, delta.cycles, sys.component_vertices(0));
    sys.undo(&[(2, 3)], &[(2, 7), (7, 3)]);
    println!("undone: {:?}", sys.component_vertices(0));

    // a splice that would give a vertex degree 3 is rejected and leaves no trace
    let err = sys.splice(&[], &[(1, 4)]).unwrap_err();
    println!("rejected at {} of {:?}: {}; still {} edges", err.stage, err.edge, err.cause, sys.edge_count());
    sys.audit().unwrap();
}
