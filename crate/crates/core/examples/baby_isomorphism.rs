// One-vertex identity: a Poisson(ℓ) sum of Exp(1) plus X²/2 has the law of
// (X + sqrt(2ℓ))²/2, checked through Laplace transforms, plus the stochastic
// domination that drives the tree coupling.

use covergff::isomorphism::{baby_iso_check, baby_iso_laplace, domination_check};
use covergff::tree::CompoundPoissonExponential;

fn main() -> covergff::Result<()> {
    for ell in [0.0, 1.0, 4.0] {
        let r = baby_iso_check(ell, &[0.5, 1.0, 2.0], 100_000, 5)?;
        for row in &r.rows {
            println!(
                "ℓ={ell} λ={}: lhs {:.5} rhs {:.5} closed form {:.5}",
                row.lambda, row.lhs, row.rhs, row.closed_form
            );
        }
    }
    println!("ℓ=0, λ=1 closed form = {:.5}", baby_iso_laplace(0.0, 1.0));

    let cpe = CompoundPoissonExponential::new(2.0)?;
    println!("\nP(S ≤ 1) = {:.6}, median {:.6} for ℓ = 2", cpe.cdf(1.0), cpe.quantile(0.5));
    let d = domination_check(2.0, 50_000, 6)?;
    println!("domination: {} grid violations, {} coupling violations", d.grid_violations, d.coupling_violations);
    Ok(())
}
