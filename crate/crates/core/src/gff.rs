//! Gaussian free field sampling and supremum statistics.
//!
//! The field is pinned at the network root. Two samplers produce the same
//! law: a dense one that multiplies i.i.d. normals by the Cholesky factor of
//! the covariance, and a tree one that sums independent edge increments
//! from the root.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::network::{Network, TreeShape};
use crate::rng::{par_replicas, stream_rng, sub_seed};
use crate::spectral::{gff_covariance, harmonic_measure};
use crate::stats::{binomial_stderr, bootstrap_median_stderr, median, normal_cdf, Welford};

pub(crate) const GFF_STREAM: u64 = 0x6FF;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GffSample {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl GffSample {
    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Dense {
        /// Lower factor of the covariance restricted to non-root vertices.
        factor: DMatrix<f64>,
        free: Vec<usize>,
    },
    Tree {
        shape: TreeShape,
        /// Standard deviation of the increment on the edge to each vertex.
        edge_sd: Vec<f64>,
    },
}

/// Reusable GFF sampler for one network.
#[derive(Debug, Clone)]
pub struct GffSampler {
    n: usize,
    backend: Backend,
    /// `max_v sqrt(R_eff(root, v))`.
    sigma_max: f64,
}

impl GffSampler {
    /// Dense sampler from the jitter-guarded Cholesky factor.
    pub fn dense(net: &Network) -> Result<Self> {
        let n = net.vertex_count();
        let root = net.root();
        let cov = gff_covariance(net)?;
        let free: Vec<usize> = (0..n).filter(|&v| v != root).collect();
        let factor = DMatrix::from_fn(free.len(), free.len(), |i, j| cov.factor[(free[i], free[j])]);
        let sigma_max = (0..n).map(|v| cov.cov[(v, v)]).fold(0.0, f64::max).sqrt();
        Ok(GffSampler {
            n,
            backend: Backend::Dense { factor, free },
            sigma_max,
        })
    }

    /// Tree sampler: `η_v = η_parent + N(0, 1/c)` along each edge.
    pub fn tree(net: &Network) -> Result<Self> {
        let shape = net
            .tree_shape()
            .ok_or_else(|| Error::NotATree("GFF tree sampler".into()))?;
        let n = net.vertex_count();
        let mut edge_sd = vec![0.0; n];
        let mut var = vec![0.0; n];
        for &v in &shape.bfs_order {
            if let Some(p) = shape.parent[v] {
                let r = 1.0 / net.conductance(p, v);
                edge_sd[v] = r.sqrt();
                var[v] = var[p] + r;
            }
        }
        let sigma_max = var.iter().copied().fold(0.0, f64::max).sqrt();
        Ok(GffSampler {
            n,
            backend: Backend::Tree { shape, edge_sd },
            sigma_max,
        })
    }

    /// Tree sampler for trees, dense otherwise.
    pub fn for_network(net: &Network) -> Result<Self> {
        if net.is_tree() {
            Self::tree(net)
        } else {
            Self::dense(net)
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        assert_eq!(out.len(), self.n);
        out.iter_mut().for_each(|x| *x = 0.0);
        match &self.backend {
            Backend::Dense { factor, free } => {
                let m = free.len();
                let mut acc = vec![0.0; m];
                for j in 0..m {
                    let z: f64 = rng.sample(StandardNormal);
                    let col = factor.column(j);
                    for i in j..m {
                        acc[i] += col[i] * z;
                    }
                }
                for (i, &v) in free.iter().enumerate() {
                    out[v] = acc[i];
                }
            }
            Backend::Tree { shape, edge_sd } => {
                for &v in &shape.bfs_order {
                    if let Some(p) = shape.parent[v] {
                        let z: f64 = rng.sample(StandardNormal);
                        out[v] = out[p] + edge_sd[v] * z;
                    }
                }
            }
        }
    }

    pub fn sample(&self, seed: u64) -> GffSample {
        let mut values = vec![0.0; self.n];
        self.sample_into(&mut stream_rng(seed, GFF_STREAM, 0), &mut values);
        GffSample { values, seed }
    }

    /// `count` independent fields; sample `i` uses stream `(seed, i)`.
    pub fn sample_many(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        par_replicas(count, seed, GFF_STREAM, |_, rng| {
            let mut v = vec![0.0; self.n];
            self.sample_into(rng, &mut v);
            v
        })
    }

    /// Parallel map over `count` fields without keeping them.
    pub fn map_samples<T, F>(&self, count: usize, seed: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[f64]) -> T + Sync + Send,
    {
        par_replicas(count, seed, GFF_STREAM, |_, rng| {
            let mut v = vec![0.0; self.n];
            self.sample_into(rng, &mut v);
            f(&v)
        })
    }
}

/// One field from the dense sampler.
pub fn sample_gff(net: &Network, seed: u64) -> Result<GffSample> {
    Ok(GffSampler::dense(net)?.sample(seed))
}

/// One field from independent unit edge increments; requires a unit tree.
pub fn sample_gff_tree(net: &Network, seed: u64) -> Result<GffSample> {
    net.require_unit_tree()?;
    Ok(GffSampler::tree(net)?.sample(seed))
}

/// Law of `η_v` given the field on a set `S` containing the root.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionalLaw {
    pub mean: f64,
    pub variance: f64,
    /// Harmonic measure `a_u = P_v(X_{τ_S} = u)`, in the order `S` was given.
    pub weights: Vec<(usize, f64)>,
}

pub fn conditional_law(net: &Network, v: usize, set: &[usize], values_on_set: &[f64]) -> Result<ConditionalLaw> {
    if set.len() != values_on_set.len() {
        return Err(Error::invalid("one value per conditioning vertex is required"));
    }
    if !set.contains(&net.root()) {
        return Err(Error::InvalidSet("conditioning set must contain the root".into()));
    }
    let (sorted_weights, variance) = harmonic_measure(net, v, set)?;
    let weight_of = |u: usize| {
        sorted_weights
            .iter()
            .find(|&&(w, _)| w == u)
            .map(|&(_, a)| a)
            .unwrap_or(0.0)
    };
    let weights: Vec<(usize, f64)> = set.iter().map(|&u| (u, weight_of(u))).collect();
    let mean = weights.iter().zip(values_on_set).map(|(&(_, a), x)| a * x).sum();
    Ok(ConditionalLaw { mean, variance, weights })
}

#[derive(Debug, Clone, Serialize)]
pub struct SupStatistics {
    pub mean_sup: f64,
    pub median_sup: f64,
    pub stderr: f64,
    /// Bootstrap standard error of the median (200 resamples).
    pub median_stderr: f64,
    pub sample_count: usize,
    pub sigma_max: f64,
    /// Fraction of samples with `|sup − mean| > 5 σ_max`.
    pub tail_fraction: f64,
    /// `tail_fraction ≤ 1e-4`.
    pub concentration_ok: bool,
}

pub const MEDIAN_BOOTSTRAP_RESAMPLES: usize = 200;

/// Summary of `sup_v η_v` from precomputed suprema.
pub fn sup_statistics(sups: &[f64], sigma_max: f64, seed: u64) -> SupStatistics {
    let w: Welford = sups.iter().copied().collect();
    let mean = w.mean();
    let far = sups
        .iter()
        .filter(|&&s| (s - mean).abs() > 5.0 * sigma_max)
        .count();
    let tail_fraction = far as f64 / sups.len() as f64;
    let mut rng = stream_rng(sub_seed(seed, "median-bootstrap"), 0, 0);
    SupStatistics {
        mean_sup: mean,
        median_sup: median(sups),
        stderr: w.stderr(),
        median_stderr: bootstrap_median_stderr(sups, MEDIAN_BOOTSTRAP_RESAMPLES, &mut rng),
        sample_count: sups.len(),
        sigma_max,
        tail_fraction,
        concentration_ok: tail_fraction <= 1e-4,
    }
}

pub fn estimate_sup(net: &Network, sample_count: usize, seed: u64) -> Result<SupStatistics> {
    estimate_sup_with(&GffSampler::for_network(net)?, sample_count, seed)
}

pub fn estimate_sup_with(sampler: &GffSampler, sample_count: usize, seed: u64) -> Result<SupStatistics> {
    if sample_count < 100 {
        return Err(Error::invalid("estimate_sup needs at least 100 samples"));
    }
    let sups = sampler.map_samples(sample_count, seed, |v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    Ok(sup_statistics(&sups, sampler.sigma_max(), seed))
}

/// Whether some vertex lies in the window
/// `M ≤ η_v ≤ M + ε (1 ∧ Δ / Σ_{u ∈ N_v} |M − η_u|)`.
pub fn detection_window_hit(net: &Network, values: &[f64], level: f64, epsilon: f64, max_degree: usize) -> bool {
    (0..net.vertex_count()).any(|v| {
        let x = values[v];
        if x < level {
            return false;
        }
        let spread: f64 = net.neighbors(v).map(|(u, _)| (level - values[u]).abs()).sum();
        let width = if spread > 0.0 {
            epsilon * (max_degree as f64 / spread).min(1.0)
        } else {
            epsilon
        };
        x <= level + width
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub level: f64,
    /// Bootstrap standard error of the level when it is an estimated median.
    pub level_stderr: Option<f64>,
    pub epsilon: f64,
    pub max_degree: usize,
    pub sample_count: usize,
    pub empirical_probability: f64,
    pub stderr: f64,
    /// `ε / 10^Δ`, the bound when the level is the median of the supremum.
    pub bound: f64,
    /// `empirical_probability ≥ bound − 4·stderr`.
    pub pass: bool,
    /// Frequency of `sup η ≥ M`.
    pub sup_exceeds_level: f64,
    /// `2ε/10^Δ · P(sup ≥ M)`, the bound for a general level.
    pub general_bound: f64,
    pub general_pass: bool,
    /// Frequency of the window with `2ε` in place of `ε`.
    pub doubled_window_probability: f64,
    pub doubled_window_pass: bool,
}

/// Detection experiment at a fixed level `M`.
pub fn detection_at_level(net: &Network, level: f64, epsilon: f64, sample_count: usize, seed: u64) -> Result<DetectionReport> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon must lie in [0, 1]"));
    }
    if sample_count == 0 {
        return Err(Error::invalid("sample_count must be positive"));
    }
    let delta = net.max_degree();
    let bound = epsilon / 10f64.powi(delta as i32);
    let sampler = GffSampler::for_network(net)?;
    let flags = sampler.map_samples(sample_count, seed, |v| {
        let sup = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let hit = epsilon > 0.0 && detection_window_hit(net, v, level, epsilon, delta);
        let hit2 = epsilon > 0.0 && detection_window_hit(net, v, level, 2.0 * epsilon, delta);
        (hit, hit2, sup >= level)
    });
    let n = flags.len();
    let freq = |f: &dyn Fn(&(bool, bool, bool)) -> bool| flags.iter().filter(|x| f(x)).count() as f64 / n as f64;
    let p = freq(&|x| x.0);
    let p2 = freq(&|x| x.1);
    let p_sup = freq(&|x| x.2);
    let se = binomial_stderr(p, n);
    let general_bound = 2.0 * bound * p_sup;
    Ok(DetectionReport {
        level,
        level_stderr: None,
        epsilon,
        max_degree: delta,
        sample_count: n,
        empirical_probability: p,
        stderr: se,
        bound,
        pass: p >= bound - 4.0 * se,
        sup_exceeds_level: p_sup,
        general_bound,
        general_pass: p >= general_bound - 4.0 * se,
        doubled_window_probability: p2,
        doubled_window_pass: p2 >= general_bound - 4.0 * binomial_stderr(p2, n),
    })
}

/// Samples in the median pre-pass of [`detection_experiment`].
pub const MEDIAN_PREPASS_CAP: usize = 100_000;

/// Detection experiment at `M` = empirical median of `sup η`, estimated from
/// an independent pre-pass of `min(sample_count, 100 000)` fields.
pub fn detection_experiment(net: &Network, epsilon: f64, sample_count: usize, seed: u64) -> Result<DetectionReport> {
    let pre = estimate_sup(net, sample_count.clamp(100, MEDIAN_PREPASS_CAP), sub_seed(seed, "median"))?;
    let mut report = detection_at_level(net, pre.median_sup, epsilon, sample_count, seed)?;
    report.level_stderr = Some(pre.median_stderr);
    Ok(report)
}

/// Overshoot comparison for `X ~ N(−μ, σ²)`:
/// `P(0 ≤ X ≤ ε (σ ∧ σ²/μ))` against `(ε/5) P(X ≥ 0)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OvershootCheck {
    pub window_probability: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn overshoot_check(mu: f64, sigma: f64, epsilon: f64) -> OvershootCheck {
    let width = if mu > 0.0 {
        epsilon * sigma.min(sigma * sigma / mu)
    } else {
        epsilon * sigma
    };
    let window_probability = normal_cdf((width + mu) / sigma) - normal_cdf(mu / sigma);
    let bound = epsilon / 5.0 * (1.0 - normal_cdf(mu / sigma));
    OvershootCheck {
        window_probability,
        bound,
        holds: window_probability >= bound,
    }
}

/// One row per field, one column per vertex.
pub fn write_samples_csv<W: Write>(mut out: W, samples: &[Vec<f64>]) -> std::io::Result<()> {
    let n = samples.first().map_or(0, Vec::len);
    let header: Vec<String> = (0..n).map(|v| format!("v{v}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for s in samples {
        let row: Vec<String> = s.iter().map(|&x| g17(x)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
