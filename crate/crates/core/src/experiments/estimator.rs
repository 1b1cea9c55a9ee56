//! Cover-time estimation from the expected supremum of the free field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gff::{estimate_sup_with, GffSampler, SupStatistics};
use crate::network::Network;
use crate::rng::sub_seed;
use crate::spectral::max_hitting_time;
use crate::stats::{ols_slope, Welford};
use crate::tree::tree_max_hitting_time;
use crate::walk::cover_time_runs;

/// Degree above which the estimate is reported but flagged.
pub const BOUNDED_DEGREE: usize = 16;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub gff_samples: usize,
    pub epsilon: f64,
    /// Cover runs for the simulated comparison; `0` skips simulation.
    pub cover_runs: usize,
    /// Start of the simulated walks; defaults to the network root.
    pub start: Option<usize>,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            gff_samples: 10_000,
            epsilon: 0.5,
            cover_runs: 0,
            start: None,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverSimulation {
    pub start: usize,
    pub runs: usize,
    pub mean: f64,
    pub stderr: f64,
    /// `mean / estimate`.
    pub ratio: f64,
    /// Delta-method standard error of `ratio`.
    pub ratio_stderr: f64,
    /// `mean ≤ 2 · estimate`.
    pub upper_bound_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverEstimate {
    /// `|E| (E sup η)²`.
    pub estimate: f64,
    pub confidence: (f64, f64),
    pub sup: SupStatistics,
    pub t_hit_exact: f64,
    /// `t_hit / estimate`.
    pub gate_ratio: f64,
    /// `ε⁴ / (10⁴ Δ²)`, i.e. the assumption with the unknown constant set to 1.
    pub gate_threshold: f64,
    pub gate_pass: bool,
    pub gate_label: &'static str,
    pub max_degree: usize,
    pub warnings: Vec<String>,
    pub simulation: Option<CoverSimulation>,
}

pub fn gate_threshold(epsilon: f64, max_degree: usize) -> f64 {
    epsilon.powi(4) / (1e4 * (max_degree as f64).powi(2))
}

fn exact_max_hitting_time(net: &Network) -> Result<f64> {
    if net.is_unit() && net.is_tree() {
        tree_max_hitting_time(net)
    } else {
        max_hitting_time(net)
    }
}

pub fn estimate_cover_time(net: &Network, cfg: &EstimatorConfig) -> Result<CoverEstimate> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
        return Err(Error::invalid("epsilon must lie in (0, 1)"));
    }
    let sampler = GffSampler::for_network(net)?;
    let sup = estimate_sup_with(&sampler, cfg.gff_samples, sub_seed(cfg.seed, "sup"))?;
    let e = net.edge_count() as f64;
    let s = sup.mean_sup;
    let estimate = e * s * s;
    if !(estimate > 0.0) {
        return Err(Error::Internal("nonpositive cover-time estimate".into()));
    }
    let half = Z95 * 2.0 * e * s.abs() * sup.stderr;
    let t_hit = exact_max_hitting_time(net)?;
    let delta = net.max_degree();
    let threshold = gate_threshold(cfg.epsilon, delta);
    let mut warnings = Vec::new();
    if delta > BOUNDED_DEGREE {
        warnings.push(format!("max degree {delta} is large; the estimate assumes bounded degree"));
    }
    if !net.is_unit() {
        warnings.push("edge count of a weighted network is used as |E|".into());
    }
    let simulation = if cfg.cover_runs > 0 {
        let start = cfg.start.unwrap_or(net.root());
        net.check_vertex(start)?;
        let runs = cover_time_runs(net, start, cfg.cover_runs, sub_seed(cfg.seed, "cover"))?;
        let w: Welford = runs.iter().map(|r| r.0).collect();
        let ratio = w.mean() / estimate;
        // ratio = m / (e s²): relative errors add in quadrature, s enters twice
        let rel = ((w.stderr() / w.mean()).powi(2) + (2.0 * sup.stderr / s).powi(2)).sqrt();
        Some(CoverSimulation {
            start,
            runs: cfg.cover_runs,
            mean: w.mean(),
            stderr: w.stderr(),
            ratio,
            ratio_stderr: ratio * rel,
            upper_bound_ok: w.mean() <= 2.0 * estimate,
        })
    } else {
        None
    };
    Ok(CoverEstimate {
        estimate,
        confidence: (estimate - half, estimate + half),
        sup,
        t_hit_exact: t_hit,
        gate_ratio: t_hit / estimate,
        gate_threshold: threshold,
        gate_pass: t_hit / estimate <= threshold,
        gate_label: "heuristic (C = 1)",
        max_degree: delta,
        warnings,
        simulation,
    })
}

/// Exact expected cover time of the unit path on `n` vertices from `start`:
/// reach one end, then cross to the other.
pub fn path_cover_time(n: usize, start: usize) -> f64 {
    let len = (n - 1) as f64;
    let m = start as f64;
    // exit time of (0, len) is m (len − m); from either end the far end is
    // hit after len² more steps
    m * (len - m) + len * len
}

/// Start of the unit path maximising the expected cover time.
pub fn path_worst_start(n: usize) -> usize {
    (n - 1) / 2
}

/// One row of the finite-size trend of `simulated t_cov / (|E| (E sup η)²)`.
#[derive(Debug, Clone, Serialize)]
pub struct RatioPoint {
    pub label: String,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub start: usize,
    pub estimate: CoverEstimate,
    pub ratio: f64,
    pub ratio_stderr: f64,
}

pub fn cover_ratio(label: &str, net: &Network, start: usize, gff_samples: usize, cover_runs: usize, seed: u64) -> Result<RatioPoint> {
    if cover_runs < 2 {
        return Err(Error::invalid("the ratio needs at least two cover runs"));
    }
    let cfg = EstimatorConfig {
        gff_samples,
        cover_runs,
        start: Some(start),
        seed,
        ..EstimatorConfig::default()
    };
    let estimate = estimate_cover_time(net, &cfg)?;
    let sim = estimate.simulation.as_ref().expect("cover runs requested");
    Ok(RatioPoint {
        label: label.into(),
        vertex_count: net.vertex_count(),
        edge_count: net.edge_count(),
        start,
        ratio: sim.ratio,
        ratio_stderr: sim.ratio_stderr,
        estimate,
    })
}

/// A deepest vertex of a rooted tree (the last one in breadth-first order).
pub fn deepest_vertex(tree: &Network) -> Result<usize> {
    let shape = tree.require_unit_tree()?;
    Ok((0..tree.vertex_count())
        .max_by_key(|&v| (shape.depth(v), v))
        .unwrap_or(tree.root()))
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionPoint {
    pub label: String,
    pub vertex_count: usize,
    pub runs: usize,
    pub mean_cover_time: f64,
    pub sd_cover_time: f64,
    /// `sd / mean` of `τ_cov`.
    pub dispersion: f64,
    pub t_hit: f64,
    /// `sqrt(t_hit / mean)`.
    pub hit_cover_scale: f64,
    /// `P(|τ_cov − mean| ≥ λ sqrt(mean · t_hit))` at λ = 1, 2, 4, 8.
    pub normalized_tails: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionReport {
    pub points: Vec<DispersionPoint>,
    /// Dispersion strictly decreasing along the family.
    pub decreasing: bool,
    /// Least-squares slope of `ln dispersion` against `ln sqrt(t_hit/t_cov)`.
    pub scaling_slope: Option<f64>,
}

/// Relative spread of the cover time along a family of networks, walks
/// started at each root.
pub fn aldous_concentration_experiment(nets: &[(String, Network)], runs: usize, seed: u64) -> Result<DispersionReport> {
    if runs < 2 {
        return Err(Error::invalid("at least two cover runs are needed"));
    }
    let mut points = Vec::with_capacity(nets.len());
    for (i, (label, net)) in nets.iter().enumerate() {
        let covers: Vec<f64> = cover_time_runs(net, net.root(), runs, sub_seed(seed, &format!("cover-{i}")))?
            .into_iter()
            .map(|c| c.0)
            .collect();
        let w: Welford = covers.iter().copied().collect();
        let t_hit = exact_max_hitting_time(net)?;
        let scale = (w.mean() * t_hit).sqrt();
        let normalized_tails = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&l| {
                let p = covers.iter().filter(|&&c| (c - w.mean()).abs() >= l * scale).count() as f64 / runs as f64;
                (l, p)
            })
            .collect();
        points.push(DispersionPoint {
            label: label.clone(),
            vertex_count: net.vertex_count(),
            runs,
            mean_cover_time: w.mean(),
            sd_cover_time: w.std_dev(),
            dispersion: w.std_dev() / w.mean(),
            t_hit,
            hit_cover_scale: (t_hit / w.mean()).sqrt(),
            normalized_tails,
        });
    }
    let decreasing = points.windows(2).all(|p| p[1].dispersion < p[0].dispersion);
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .map(|p| (p.hit_cover_scale.ln(), p.dispersion.ln()))
        .unzip();
    Ok(DispersionReport {
        points,
        decreasing,
        scaling_slope: ols_slope(&xs, &ys),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs;
    use crate::walk::exact_cover_time;

    #[test]
    fn single_edge_estimate_and_gate() {
        let net = graphs::path(2);
        let cfg = EstimatorConfig {
            gff_samples: 200_000,
            cover_runs: 20_000,
            ..EstimatorConfig::default()
        };
        let est = estimate_cover_time(&net, &cfg).unwrap();
        // sup = max(0, N(0,1)) has mean 1/sqrt(2π)
        let exact = 1.0 / (2.0 * std::f64::consts::PI);
        assert!((est.estimate - exact).abs() < 0.005, "{}", est.estimate);
        assert!(est.confidence.0 < est.estimate && est.estimate < est.confidence.1);
        assert_eq!(est.t_hit_exact, 1.0);
        assert!(!est.gate_pass);
        let sim = est.simulation.unwrap();
        assert!((sim.mean - 1.0).abs() < 0.05);
        assert!(!sim.upper_bound_ok);
    }

    #[test]
    fn path_cover_formula_matches_absorbing_chain() {
        for n in 2..=7 {
            let net = graphs::path(n);
            for s in 0..n {
                let (exact, _) = exact_cover_time(&net, s).unwrap();
                assert!((path_cover_time(n, s) - exact).abs() < 1e-8 * exact, "n={n} s={s}");
            }
            let worst = path_worst_start(n);
            assert!((0..n).all(|s| path_cover_time(n, s) <= path_cover_time(n, worst)));
        }
    }

    #[test]
    fn delta_method_interval_is_calibrated() {
        let net = graphs::path(2);
        let exact = 1.0 / (2.0 * std::f64::consts::PI);
        let reps = 400;
        let covered = (0..reps)
            .filter(|&s| {
                let cfg = EstimatorConfig {
                    gff_samples: 400,
                    seed: 1000 + s,
                    ..EstimatorConfig::default()
                };
                let (lo, hi) = estimate_cover_time(&net, &cfg).unwrap().confidence;
                lo <= exact && exact <= hi
            })
            .count() as f64
            / reps as f64;
        assert!((0.92..=0.98).contains(&covered), "coverage {covered}");
    }

    #[test]
    fn dispersion_shrinks_on_binary_trees() {
        let nets: Vec<(String, Network)> = (3..=6).map(|h| (format!("binary-{h}"), graphs::binary_tree(h))).collect();
        let r = aldous_concentration_experiment(&nets, 3000, 5).unwrap();
        assert!(r.decreasing, "{:?}", r.points.iter().map(|p| p.dispersion).collect::<Vec<_>>());
    }

    #[test]
    fn deepest_vertex_is_a_leaf() {
        let t = graphs::binary_tree(3);
        let v = deepest_vertex(&t).unwrap();
        assert_eq!(t.degree(v), 1);
        assert!(deepest_vertex(&graphs::cycle(4)).is_err());
    }
}
