// Local times on a tree: the recursive compound-Poisson sampler, its quantile
// coupling with the free field, and cover-time concentration.

use covergff::graphs;
use covergff::tree::{coupled_runs, domination_violations, recursive_local_time_sampler, tree_concentration_experiment};

fn main() -> covergff::Result<()> {
    let tree = graphs::binary_tree(4);
    let field = recursive_local_time_sampler(&tree, 1.0, 3)?;
    let leaf = tree.vertex_count() - 1;
    println!("ℓ at τ(1): root {:.3}, child {:.3}, leaf {:.3}", field.ell[0], field.ell[1], field.ell[leaf]);

    let pairs = coupled_runs(&tree, 2.0, 10_000, 4)?;
    let violations: usize = pairs.iter().map(|(f, eta)| domination_violations(f, eta).len()).sum();
    println!("coupled samples: {}, domination violations: {violations}", pairs.len());

    let r = tree_concentration_experiment(&graphs::binary_tree(5), 1000, 10_000, 5)?;
    println!(
        "binary tree depth 5: mean τ_cov {:.1}, |E|(E sup η)² {:.1}, ratio {:.3}",
        r.mean_cover_time,
        r.edge_count as f64 * r.mean_sup * r.mean_sup,
        r.ratio
    );
    for p in &r.normalized_tails {
        println!("  P(|τ_cov − t_cov| ≥ {} sqrt(t_cov t_hit)) = {:.4}", p.lambda, p.probability);
    }
    Ok(())
}
