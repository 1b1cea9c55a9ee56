// The embedded path of a walk stopped at τ(t), conditioned on its local
// times: exact law from the path weights, compared with simulation.

use covergff::eulerian::{conditioned_path_distribution, path_weight, walk_law_consistency, WeightForm};
use covergff::graphs;

fn main() -> covergff::Result<()> {
    let net = graphs::path(3);
    let ell = [1.0, 1.5, 0.8];
    let dist = conditioned_path_distribution(&net, &ell, 8)?;
    println!("{} paths with at most 8 steps; top five:", dist.paths.len());
    let mut order: Vec<usize> = (0..dist.paths.len()).collect();
    order.sort_by(|&a, &b| dist.probabilities[b].total_cmp(&dist.probabilities[a]));
    for &i in order.iter().take(5) {
        println!("  {:?}  p = {:.4}", dist.paths[i], dist.probabilities[i]);
    }
    let w = path_weight(&[0, 1, 2, 1, 0], &ell, &net, WeightForm::Normalized)?;
    println!("W(0 1 2 1 0) = {:.6}", w.value);

    let two = graphs::path(2);
    let r = walk_law_consistency(&two, &[1.0, 1.0], 0.1, 50_000, 10, 9)?;
    println!("\ntwo-vertex net, ±10% bin: {} of {} walks kept", r.kept, r.runs);
    for row in &r.rows {
        println!("  {:?}: predicted {:.4}, observed {:.4}", row.path, row.predicted, row.observed);
    }
    Ok(())
}
