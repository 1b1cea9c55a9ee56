// Counting Eulerian circuits: matrix-tree arborescences, the BEST formula,
// brute-force enumeration and the number of distinct vertex sequences.

use covergff::eulerian::{
    arborescence_count, best_circuit_count, brute_force_circuits, brute_force_paths, path_count, EulerianMultigraph,
    DEFAULT_EDGE_CAP,
};

const MULTIGRAPH: &str = "\
# u v multiplicity
0 1 2
1 0 1
1 2 2
2 1 1
2 0 1
0 2 0
";

fn main() -> covergff::Result<()> {
    let g = EulerianMultigraph::parse(MULTIGRAPH)?;
    println!("balanced: {}, Eulerian: {}", g.is_balanced(), g.is_eulerian());
    for w in 0..g.vertex_count() {
        println!("arborescences into {w}: {}", arborescence_count(&g, w)?);
    }
    let best = best_circuit_count(&g)?;
    println!("BEST circuits:        {}", best.circuits);
    println!("brute-force circuits: {}", brute_force_circuits(&g, DEFAULT_EDGE_CAP)?);
    println!("paths from 0:         {} (enumerated {})", path_count(&g, 0)?, brute_force_paths(&g, 0, false, DEFAULT_EDGE_CAP)?);
    Ok(())
}
