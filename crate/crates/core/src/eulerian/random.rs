//! Random Eulerian graphs with `P(G) ∝ ar(G) Π w_uv^{j_uv} / j_uv!`,
//! sampled exactly by enumeration.

use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::{arborescence_count, eulerian_multigraphs, paths, EulerianMultigraph};
use crate::error::{Error, Result};
use crate::rng::{par_replicas, stream_rng};

pub const DEFAULT_RANDOM_CAP: u32 = 6;
const MAX_VERTICES: usize = 4;
const MAX_CAP: u32 = 8;
const RANDOM_EULERIAN_STREAM: u64 = 0xE1;

#[derive(Debug, Clone, Serialize)]
pub struct RandomEulerianLaw {
    pub cap: u32,
    pub graphs: Vec<EulerianMultigraph>,
    pub probabilities: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl RandomEulerianLaw {
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.graphs.len() - 1)
    }

    /// Indices of `count` draws; draw `i` uses stream `(seed, i)`.
    pub fn sample_many(&self, count: usize, seed: u64) -> Vec<usize> {
        par_replicas(count, seed, RANDOM_EULERIAN_STREAM, |_, rng| self.sample_index(rng))
    }

    pub fn probability_of(&self, g: &EulerianMultigraph) -> f64 {
        self.graphs
            .iter()
            .position(|h| h == g)
            .map_or(0.0, |i| self.probabilities[i])
    }
}

/// Exact law over Eulerian graphs on `weights.len()` vertices with total
/// multiplicity at most `cap`. Pairs with zero weight carry no edges.
pub fn random_eulerian_law(weights: &[Vec<f64>], cap: u32) -> Result<RandomEulerianLaw> {
    let n = weights.len();
    if n > MAX_VERTICES {
        return Err(Error::CapExceeded {
            what: "vertices for the random Eulerian model",
            actual: n,
            cap: MAX_VERTICES,
        });
    }
    if cap > MAX_CAP {
        return Err(Error::CapExceeded {
            what: "total multiplicity",
            actual: cap as usize,
            cap: MAX_CAP as usize,
        });
    }
    if weights.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("weight matrix must be square"));
    }
    if weights.iter().flatten().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let mut graphs = Vec::new();
    let mut log_mass = Vec::new();
    for g in eulerian_multigraphs(n, cap) {
        if g.edges().iter().any(|&(u, v, _)| weights[u][v] == 0.0) {
            continue;
        }
        let ar = arborescence_count(&g, 0)?;
        let mut lm = paths::ln_biguint(&ar);
        for (u, v, k) in g.edges() {
            lm += f64::from(k) * weights[u][v].ln() - ln_gamma(f64::from(k) + 1.0);
        }
        graphs.push(g);
        log_mass.push(lm);
    }
    if graphs.is_empty() {
        return Err(Error::invalid("no Eulerian graph has positive mass under the cap"));
    }
    let top = log_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mass: Vec<f64> = log_mass.iter().map(|m| (m - top).exp()).collect();
    let z: f64 = mass.iter().sum();
    let probabilities: Vec<f64> = mass.iter().map(|m| m / z).collect();
    let mut acc = 0.0;
    let cumulative = probabilities
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    Ok(RandomEulerianLaw {
        cap,
        graphs,
        probabilities,
        cumulative,
    })
}

pub fn random_eulerian_sampler(weights: &[Vec<f64>], cap: u32, seed: u64) -> Result<EulerianMultigraph> {
    let law = random_eulerian_law(weights, cap)?;
    let i = law.sample_index(&mut stream_rng(seed, RANDOM_EULERIAN_STREAM, 0));
    Ok(law.graphs[i].clone())
}

/// Lines `u v w`, read symmetrically only if both directions are listed.
pub fn parse_weights(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let err = |m: &str| Error::Parse {
            line: i + 1,
            message: m.into(),
        };
        if f.len() != 3 {
            return Err(err("expected `u v w`"));
        }
        let u: usize = f[0].parse().map_err(|_| err("bad vertex"))?;
        let v: usize = f[1].parse().map_err(|_| err("bad vertex"))?;
        let w: f64 = f[2].parse().map_err(|_| err("bad weight"))?;
        if !(w >= 0.0) {
            return Err(err("weights must be nonnegative"));
        }
        if u == v {
            return Err(err("self-loops carry no weight"));
        }
        entries.push((u, v, w));
    }
    if entries.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let n = entries.iter().map(|e| e.0.max(e.1)).max().unwrap_or(0) + 1;
    let mut w = vec![vec![0.0; n]; n];
    for (u, v, x) in entries {
        w[u][v] += x;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::binomial_stderr;

    #[test]
    fn two_vertex_masses() {
        let w = 0.8;
        let law = random_eulerian_law(&[vec![0.0, w], vec![w, 0.0]], 8).unwrap();
        assert_eq!(law.graphs.len(), 4);
        // mass ∝ k · w^{2k} / (k!)², k = 1..4
        let fact = |k: i32| (1..=k).product::<i32>() as f64;
        let masses: Vec<f64> = (1..=4).map(|k| k as f64 * w.powi(2 * k) / fact(k).powi(2)).collect();
        let z: f64 = masses.iter().sum();
        for k in 1..=4u32 {
            let g = EulerianMultigraph::from_edges(2, &[(0, 1, k), (1, 0, k)]).unwrap();
            assert!((law.probability_of(&g) - masses[k as usize - 1] / z).abs() < 1e-12);
        }
        assert!((law.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_frequencies() {
        let w = vec![vec![0.0, 1.0, 0.5], vec![0.7, 0.0, 1.2], vec![0.9, 0.4, 0.0]];
        let law = random_eulerian_law(&w, 5).unwrap();
        let draws = law.sample_many(100_000, 3);
        let mut counts = vec![0usize; law.graphs.len()];
        for i in draws {
            counts[i] += 1;
        }
        for (c, &p) in counts.iter().zip(&law.probabilities) {
            let f = *c as f64 / 1e5;
            assert!((f - p).abs() <= 4.0 * binomial_stderr(p, 100_000) + 1e-12);
        }
    }

    #[test]
    fn limits_and_parsing() {
        let w = vec![vec![0.0; 5]; 5];
        assert!(random_eulerian_law(&w, 4).is_err());
        assert!(random_eulerian_law(&[vec![0.0, 1.0], vec![1.0, 0.0]], 9).is_err());
        assert!(random_eulerian_law(&[vec![0.0, 1.0], vec![0.0, 0.0]], 4).is_err());
        let parsed = parse_weights("0 1 0.5\n1 0 0.5\n").unwrap();
        assert_eq!(parsed, vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
        let g = random_eulerian_sampler(&parsed, 6, 1).unwrap();
        assert!(g.is_eulerian());
    }
}
