//! Directed Eulerian multigraphs: arborescences, BEST counts, path counts,
//! the conditioned path law of the embedded walk, and the random Eulerian
//! graph model.

mod brute;
mod paths;
mod random;
mod thin;

pub use brute::{brute_force_arborescences, brute_force_circuits, brute_force_paths, DEFAULT_EDGE_CAP};
pub use paths::{
    arborescence_ratio_check, class_weight, conditioned_path_distribution, path_weight, reverse_segment,
    traverse_decay_report, walk_law_consistency, ArborescenceRatioCheck, ClassCheck, DecayRatio, PathDistribution,
    PathWeight, TraverseDecayReport, WalkLawReport, WalkLawRow, WeightForm, DEFAULT_TRAVERSE_CAP,
};
pub use random::{parse_weights, random_eulerian_law, random_eulerian_sampler, RandomEulerianLaw, DEFAULT_RANDOM_CAP};
pub use thin::{thin_point_consistency, ThinBin, ThinPointReport, THIN_FACTOR};

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Directed multigraph given by multiplicities `j[u][v]`, no self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EulerianMultigraph {
    j: Vec<Vec<u32>>,
}

impl EulerianMultigraph {
    pub fn new(multiplicities: Vec<Vec<u32>>) -> Result<Self> {
        let n = multiplicities.len();
        if n == 0 {
            return Err(Error::EmptyNetwork);
        }
        for (u, row) in multiplicities.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("multiplicity matrix must be square"));
            }
            if row[u] != 0 {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
        }
        Ok(EulerianMultigraph { j: multiplicities })
    }

    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut j = vec![vec![0; vertex_count]; vertex_count];
        for &(u, v, k) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::VertexOutOfRange {
                    vertex: u.max(v),
                    vertex_count,
                });
            }
            j[u][v] += k;
        }
        Self::new(j)
    }

    /// Lines `u v j`; `#` starts a comment; repeated pairs add up.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_err = |message: &str| Error::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            if fields.len() != 3 {
                return Err(parse_err("expected `u v j`"));
            }
            let u: usize = fields[0].parse().map_err(|_| parse_err("bad vertex"))?;
            let v: usize = fields[1].parse().map_err(|_| parse_err("bad vertex"))?;
            let k: u32 = fields[2].parse().map_err(|_| parse_err("bad multiplicity"))?;
            if u == v && k > 0 {
                return Err(parse_err("self-loops are not allowed"));
            }
            edges.push((u, v, k));
        }
        if edges.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        let n = edges.iter().map(|e| e.0.max(e.1)).max().unwrap_or(0) + 1;
        Self::from_edges(n, &edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (u, v, k) in self.edges() {
            let _ = writeln!(s, "{u} {v} {k}");
        }
        s
    }

    pub fn vertex_count(&self) -> usize {
        self.j.len()
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> u32 {
        self.j[u][v]
    }

    pub fn multiplicities(&self) -> &[Vec<u32>] {
        &self.j
    }

    /// `(u, v, j_uv)` for every pair with `j_uv > 0`.
    pub fn edges(&self) -> Vec<(usize, usize, u32)> {
        let n = self.vertex_count();
        (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter_map(|(u, v)| (self.j[u][v] > 0).then(|| (u, v, self.j[u][v])))
            .collect()
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.j.iter().flatten().sum()
    }

    pub fn out_degree(&self, v: usize) -> u32 {
        self.j[v].iter().sum()
    }

    pub fn in_degree(&self, v: usize) -> u32 {
        self.j.iter().map(|row| row[v]).sum()
    }

    pub fn is_balanced(&self) -> bool {
        (0..self.vertex_count()).all(|v| self.out_degree(v) == self.in_degree(v))
    }

    /// Every vertex has an edge and the underlying graph is connected.
    pub fn is_spanning_connected(&self) -> bool {
        let n = self.vertex_count();
        if (0..n).any(|v| self.out_degree(v) + self.in_degree(v) == 0) {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if !seen[v] && (self.j[u][v] > 0 || self.j[v][u] > 0) {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Balanced, and connected with every vertex on the support.
    pub fn is_eulerian(&self) -> bool {
        self.is_balanced() && self.is_spanning_connected()
    }

    pub(crate) fn require_eulerian(&self) -> Result<()> {
        if !self.is_balanced() {
            return Err(Error::NotEulerian("in-degree differs from out-degree".into()));
        }
        if !self.is_spanning_connected() {
            return Err(Error::NotEulerian("support is not connected over all vertices".into()));
        }
        Ok(())
    }

    /// Graph induced by the traverse counts of a closed path.
    pub fn from_path(vertex_count: usize, path: &[usize]) -> Result<Self> {
        let mut j = vec![vec![0u32; vertex_count]; vertex_count];
        for w in path.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidPath("consecutive repeated vertex".into()));
            }
            j[w[0]][w[1]] += 1;
        }
        Self::new(j)
    }
}

fn factorial(k: u32) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
pub fn bareiss_determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for jx in k + 1..n {
                let v = &a[i][jx] * &a[k][k] - &a[i][k] * &a[k][jx];
                a[i][jx] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Number of spanning arborescences oriented toward `root`, parallel edges
/// distinguished: the root-deleted minor of the out-degree Laplacian.
pub fn arborescence_count(g: &EulerianMultigraph, root: usize) -> Result<BigUint> {
    let n = g.vertex_count();
    if root >= n {
        return Err(Error::VertexOutOfRange { vertex: root, vertex_count: n });
    }
    let keep: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    let minor: Vec<Vec<i64>> = keep
        .iter()
        .map(|&u| {
            keep.iter()
                .map(|&v| {
                    if u == v {
                        i64::from(g.out_degree(u))
                    } else {
                        -i64::from(g.multiplicity(u, v))
                    }
                })
                .collect()
        })
        .collect();
    let det = bareiss_determinant(&minor);
    if det.is_negative() {
        return Err(Error::Internal("negative arborescence determinant".into()));
    }
    Ok(det.magnitude().clone())
}

#[derive(Debug, Clone, Serialize)]
pub struct BestCount {
    /// Arborescence count (the same toward every root).
    #[serde(serialize_with = "decimal")]
    pub arborescences: BigUint,
    /// Circuits up to cyclic rotation.
    #[serde(serialize_with = "decimal")]
    pub circuits: BigUint,
    /// `ec_v = deg_v · ec`: circuits starting at `v`.
    #[serde(serialize_with = "decimals")]
    pub circuits_from: Vec<BigUint>,
}

/// Big integers go out as decimal strings so no reader rounds them.
fn decimal<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn decimals<S: serde::Serializer>(xs: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|x| x.to_string()))
}

/// `ec = ar_w · Π_v (deg_v − 1)!`; checks that `ar_w` does not depend on `w`.
pub fn best_circuit_count(g: &EulerianMultigraph) -> Result<BestCount> {
    g.require_eulerian()?;
    let n = g.vertex_count();
    let ar = arborescence_count(g, 0)?;
    for w in 1..n {
        let other = arborescence_count(g, w)?;
        if other != ar {
            return Err(Error::Internal(format!(
                "arborescence count depends on the root: {ar} toward 0, {other} toward {w}"
            )));
        }
    }
    let circuits = (0..n).fold(ar.clone(), |acc, v| acc * factorial(g.out_degree(v) - 1));
    let circuits_from = (0..n).map(|v| &circuits * g.out_degree(v)).collect();
    Ok(BestCount {
        arborescences: ar,
        circuits,
        circuits_from,
    })
}

/// `|Ω(G)| = ec_{v0} / Π j_uv!`, the number of vertex sequences from `v0`
/// inducing `G`. Errors if the division is not exact.
pub fn path_count(g: &EulerianMultigraph, v0: usize) -> Result<BigUint> {
    let best = best_circuit_count(g)?;
    let ec0 = best
        .circuits_from
        .get(v0)
        .ok_or(Error::VertexOutOfRange {
            vertex: v0,
            vertex_count: g.vertex_count(),
        })?
        .clone();
    let denom = g
        .edges()
        .iter()
        .fold(BigUint::one(), |acc, &(_, _, k)| acc * factorial(k));
    if !(&ec0 % &denom).is_zero() {
        return Err(Error::Internal(format!("path count {ec0}/{denom} is not an integer")));
    }
    Ok(ec0 / denom)
}

/// Every Eulerian multigraph on exactly `n` vertices with total
/// multiplicity at most `cap`.
pub fn eulerian_multigraphs(n: usize, cap: u32) -> Vec<EulerianMultigraph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|(u, v)| u != v)
        .collect();
    let mut out = Vec::new();
    let mut j = vec![vec![0u32; n]; n];
    fn rec(
        idx: usize,
        left: u32,
        pairs: &[(usize, usize)],
        j: &mut Vec<Vec<u32>>,
        out: &mut Vec<EulerianMultigraph>,
    ) {
        if idx == pairs.len() {
            let g = EulerianMultigraph { j: j.clone() };
            if g.is_eulerian() {
                out.push(g);
            }
            return;
        }
        let (u, v) = pairs[idx];
        for k in 0..=left {
            j[u][v] = k;
            rec(idx + 1, left - k, pairs, j, out);
        }
        j[u][v] = 0;
    }
    rec(0, cap, &pairs, &mut j, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle(k: u32) -> EulerianMultigraph {
        EulerianMultigraph::from_edges(2, &[(0, 1, k), (1, 0, k)]).unwrap()
    }

    fn complete3() -> EulerianMultigraph {
        let edges: Vec<(usize, usize, u32)> = (0..3)
            .flat_map(|u| (0..3).filter(move |&v| v != u).map(move |v| (u, v, 1)))
            .collect();
        EulerianMultigraph::from_edges(3, &edges).unwrap()
    }

    #[test]
    fn bareiss_small() {
        assert_eq!(bareiss_determinant(&[vec![2, 1], vec![1, 3]]), BigInt::from(5));
        assert_eq!(bareiss_determinant(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(
            bareiss_determinant(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]),
            BigInt::from(-3)
        );
    }

    #[test]
    fn arborescence_examples() {
        assert_eq!(arborescence_count(&two_cycle(1), 0).unwrap(), BigUint::from(1u32));
        assert_eq!(arborescence_count(&two_cycle(2), 1).unwrap(), BigUint::from(2u32));
        assert_eq!(arborescence_count(&complete3(), 2).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn best_examples() {
        let b = best_circuit_count(&two_cycle(1)).unwrap();
        assert_eq!(b.circuits, BigUint::from(1u32));
        let b = best_circuit_count(&complete3()).unwrap();
        assert_eq!(b.circuits, BigUint::from(3u32));
        let b = best_circuit_count(&two_cycle(2)).unwrap();
        assert_eq!(b.circuits, BigUint::from(2u32));
        assert_eq!(b.circuits_from[0], BigUint::from(4u32));
        let single = EulerianMultigraph::new(vec![vec![0]]).unwrap();
        assert!(matches!(best_circuit_count(&single), Err(Error::NotEulerian(_))));
    }

    #[test]
    fn path_count_examples() {
        assert_eq!(path_count(&two_cycle(1), 0).unwrap(), BigUint::from(1u32));
        assert_eq!(path_count(&two_cycle(2), 0).unwrap(), BigUint::from(1u32));
        assert_eq!(path_count(&complete3(), 1).unwrap(), BigUint::from(6u32));
    }

    #[test]
    fn text_round_trip() {
        let g = EulerianMultigraph::parse("# doubled cycle\n0 1 2\n1 0 2\n").unwrap();
        assert_eq!(g, two_cycle(2));
        assert_eq!(EulerianMultigraph::parse(&g.to_text()).unwrap(), g);
        assert!(EulerianMultigraph::parse("0 0 1\n").is_err());
        assert!(EulerianMultigraph::parse("0 1\n").is_err());
    }

    #[test]
    fn sweep_sizes() {
        // on two vertices only j_01 = j_10 = k ≥ 1
        assert_eq!(eulerian_multigraphs(2, 8).len(), 4);
        assert!(eulerian_multigraphs(3, 6).iter().all(|g| g.is_eulerian()));
    }
}
