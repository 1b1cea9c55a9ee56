//! Exhaustive counts used to check the closed-form ones.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::EulerianMultigraph;
use crate::error::{Error, Result};

pub const DEFAULT_EDGE_CAP: u32 = 12;

fn check_cap(g: &EulerianMultigraph, cap: u32) -> Result<()> {
    let total = g.total_multiplicity();
    if total > cap {
        return Err(Error::CapExceeded {
            what: "total edge multiplicity",
            actual: total as usize,
            cap: cap as usize,
        });
    }
    Ok(())
}

/// Walks from `v` that use up every remaining edge and end at `target`.
/// With `labelled`, parallel edges count separately (factor `j_vu` per step).
fn extensions(v: usize, target: usize, left: u32, j: &mut [Vec<u32>], labelled: bool) -> BigUint {
    if left == 0 {
        return if v == target { BigUint::one() } else { BigUint::zero() };
    }
    let mut total = BigUint::zero();
    for u in 0..j.len() {
        let k = j[v][u];
        if k == 0 {
            continue;
        }
        j[v][u] -= 1;
        let sub = extensions(u, target, left - 1, j, labelled);
        j[v][u] += 1;
        total += if labelled { sub * k } else { sub };
    }
    total
}

/// Eulerian circuits up to cyclic rotation, parallel edges distinguished.
/// Each rotation class has exactly one member starting with the smallest
/// labelled edge, so the count fixes that edge first.
pub fn brute_force_circuits(g: &EulerianMultigraph, edge_cap: u32) -> Result<BigUint> {
    check_cap(g, edge_cap)?;
    g.require_eulerian()?;
    let mut j = g.multiplicities().to_vec();
    let (u, v, _) = g.edges()[0];
    j[u][v] -= 1;
    Ok(extensions(v, u, g.total_multiplicity() - 1, &mut j, true))
}

/// Labelled circuits starting at `v0` (`ec_{v0}`) when `labelled`, otherwise
/// distinct vertex sequences from `v0` inducing `g` (`|Ω(G)|`).
pub fn brute_force_paths(g: &EulerianMultigraph, v0: usize, labelled: bool, edge_cap: u32) -> Result<BigUint> {
    check_cap(g, edge_cap)?;
    g.require_eulerian()?;
    let mut j = g.multiplicities().to_vec();
    Ok(extensions(v0, v0, g.total_multiplicity(), &mut j, labelled))
}

/// Arborescences toward `root` by trying every choice of one out-edge per
/// non-root vertex.
pub fn brute_force_arborescences(g: &EulerianMultigraph, root: usize) -> BigUint {
    let n = g.vertex_count();
    let others: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    let mut choice = vec![usize::MAX; n];
    fn rec(idx: usize, others: &[usize], root: usize, g: &EulerianMultigraph, choice: &mut [usize]) -> BigUint {
        if idx == others.len() {
            // every vertex must reach the root by following its choice
            let n = choice.len();
            let ok = others.iter().all(|&s| {
                let mut v = s;
                for _ in 0..n {
                    if v == root {
                        return true;
                    }
                    v = choice[v];
                }
                v == root
            });
            return if ok { BigUint::one() } else { BigUint::zero() };
        }
        let v = others[idx];
        let mut total = BigUint::zero();
        for u in 0..choice.len() {
            let k = g.multiplicity(v, u);
            if k > 0 {
                choice[v] = u;
                total += rec(idx + 1, others, root, g, choice) * k;
            }
        }
        total
    }
    rec(0, &others, root, g, &mut choice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eulerian::{arborescence_count, best_circuit_count, eulerian_multigraphs, path_count};

    #[test]
    fn brute_force_matches_closed_forms_on_three_vertices() {
        for g in eulerian_multigraphs(3, 6) {
            let best = best_circuit_count(&g).unwrap();
            assert_eq!(brute_force_circuits(&g, DEFAULT_EDGE_CAP).unwrap(), best.circuits);
            for v in 0..3 {
                assert_eq!(arborescence_count(&g, v).unwrap(), brute_force_arborescences(&g, v));
                assert_eq!(brute_force_paths(&g, v, true, DEFAULT_EDGE_CAP).unwrap(), best.circuits_from[v]);
                assert_eq!(brute_force_paths(&g, v, false, DEFAULT_EDGE_CAP).unwrap(), path_count(&g, v).unwrap());
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = EulerianMultigraph::from_edges(2, &[(0, 1, 7), (1, 0, 7)]).unwrap();
        assert!(matches!(brute_force_circuits(&g, 12), Err(Error::CapExceeded { .. })));
    }
}
