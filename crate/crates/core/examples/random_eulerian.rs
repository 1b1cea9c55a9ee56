// Random Eulerian graphs with P(G) ∝ ar(G) Π w^j / j!, by exact enumeration.

use covergff::eulerian::{parse_weights, random_eulerian_law};

const WEIGHTS: &str = "\
0 1 0.8
1 0 0.8
1 2 0.5
2 1 0.5
2 0 0.3
0 2 0.3
";

fn main() -> covergff::Result<()> {
    let w = parse_weights(WEIGHTS)?;
    let law = random_eulerian_law(&w, 6)?;
    println!("{} Eulerian graphs with total multiplicity ≤ 6", law.graphs.len());
    let draws = law.sample_many(100_000, 1);
    let mut counts = vec![0usize; law.graphs.len()];
    for i in draws {
        counts[i] += 1;
    }
    let mut order: Vec<usize> = (0..law.graphs.len()).collect();
    order.sort_by(|&a, &b| law.probabilities[b].total_cmp(&law.probabilities[a]));
    for &i in order.iter().take(4) {
        println!(
            "{:?}: exact {:.4}, sampled {:.4}",
            law.graphs[i].edges(),
            law.probabilities[i],
            counts[i] as f64 / 1e5
        );
    }
    Ok(())
}
