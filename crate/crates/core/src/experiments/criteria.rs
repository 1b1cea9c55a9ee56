//! The twelve end-to-end checks, parameterised by a sample budget.

use serde::Serialize;

use super::checks::{
    best_sweep, commute_identity_check, cover_oracle_check, coupling_check, recursive_sampler_check,
    small_connected_graphs, wp_invariance_check,
};
use super::estimator::{cover_ratio, deepest_vertex, path_worst_start, RatioPoint};
use crate::error::Result;
use crate::eulerian::{walk_law_consistency, DEFAULT_TRAVERSE_CAP};
use crate::gff::detection_experiment;
use crate::graphs;
use crate::isomorphism::{baby_iso_check, ray_knight_two_sample};
use crate::network::Network;
use crate::rng::sub_seed;
use crate::walk::inverse_local_time_tails;

/// Band for the line-graph negative control, `5π/8 ± 10%`.
pub const LINE_RATIO_BAND: (f64, f64) = (1.77, 2.16);
/// Ceiling on the depth-10 binary-tree ratio.
pub const TREE_RATIO_CEILING: f64 = 1.6;

#[derive(Debug, Clone, Serialize)]
pub struct Budget {
    pub ray_knight_samples: usize,
    pub baby_iso_samples: usize,
    pub coupling_samples: usize,
    pub sampler_samples: usize,
    pub best_vertices: usize,
    pub best_cap: u32,
    pub invariance_paths: usize,
    pub path_law_runs: usize,
    pub line_vertices: usize,
    pub line_cover_runs: usize,
    pub gff_samples: usize,
    pub tree_depths: Vec<u32>,
    pub tree_cover_runs: usize,
    pub tail_runs: usize,
    pub detection_samples: usize,
    pub oracle_runs: usize,
}

impl Budget {
    /// Sample sizes of the acceptance run.
    pub fn acceptance() -> Self {
        Budget {
            ray_knight_samples: 100_000,
            baby_iso_samples: 100_000,
            coupling_samples: 10_000,
            sampler_samples: 10_000,
            best_vertices: 4,
            best_cap: 8,
            invariance_paths: 1000,
            path_law_runs: 100_000,
            line_vertices: 200,
            line_cover_runs: 2000,
            gff_samples: 10_000,
            tree_depths: vec![6, 8, 10],
            tree_cover_runs: 1000,
            tail_runs: 10_000,
            detection_samples: 1_000_000,
            oracle_runs: 100_000,
        }
    }

    /// Every Monte Carlo count multiplied by `factor` (floors keep each check
    /// meaningful); exact sweeps shrink to three vertices below `factor = 1`.
    pub fn scaled(factor: f64) -> Self {
        let a = Budget::acceptance();
        let s = |n: usize, floor: usize| ((n as f64 * factor).round() as usize).max(floor);
        let small = factor < 1.0;
        Budget {
            ray_knight_samples: s(a.ray_knight_samples, 500),
            baby_iso_samples: s(a.baby_iso_samples, 500),
            coupling_samples: s(a.coupling_samples, 500),
            sampler_samples: s(a.sampler_samples, 500),
            best_vertices: if small { 3 } else { a.best_vertices },
            best_cap: if small { 6 } else { a.best_cap },
            invariance_paths: s(a.invariance_paths, 50),
            path_law_runs: s(a.path_law_runs, 20_000),
            line_vertices: if small { 50 } else { a.line_vertices },
            line_cover_runs: s(a.line_cover_runs, 200),
            gff_samples: s(a.gff_samples, 1000),
            tree_depths: if small { vec![4, 6, 8] } else { a.tree_depths },
            tree_cover_runs: s(a.tree_cover_runs, 200),
            tail_runs: s(a.tail_runs, 1000),
            detection_samples: s(a.detection_samples, 100_000),
            oracle_runs: s(a.oracle_runs, 2000),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub summary: String,
    pub detail: serde_json::Value,
}

fn outcome<T: Serialize>(id: u32, name: &'static str, pass: bool, summary: String, detail: &T) -> Result<CriterionOutcome> {
    Ok(CriterionOutcome {
        id,
        name,
        pass,
        summary,
        detail: serde_json::to_value(detail)?,
    })
}

pub fn ray_knight_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let nets = [
        ("two-vertex", graphs::path(2)),
        ("path-5", graphs::path(5)),
        ("random-tree-10", graphs::random_tree(10, 10)),
    ];
    let mut reports = Vec::new();
    let mut worst_p = f64::INFINITY;
    let mut worst_lt_z: f64 = 0.0;
    for (i, (label, net)) in nets.iter().enumerate() {
        for (k, &t) in [0.5, 2.0].iter().enumerate() {
            let r = ray_knight_two_sample(net, t, b.ray_knight_samples, sub_seed(seed, &format!("rk-{i}-{k}")))?;
            for v in r.per_vertex.iter().filter(|v| v.vertex != net.root()) {
                worst_p = worst_p.min(v.ks.p_value / r.ks_level);
                if v.local_time_stderr > 0.0 {
                    worst_lt_z = worst_lt_z.max((v.local_time_mean - t).abs() / v.local_time_stderr);
                }
            }
            reports.push((label.to_string(), r));
        }
    }
    let pass = reports.iter().all(|(_, r)| r.pass && r.per_vertex.iter().all(|v| v.ks_pass && v.local_time_pass));
    let summary = format!(
        "{} configurations, min KS p / Bonferroni level = {:.3}, worst |E L − t| = {:.2} se",
        reports.len(),
        worst_p,
        worst_lt_z
    );
    outcome(1, "Ray-Knight identity", pass, summary, &reports)
}

pub fn baby_iso_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let lambdas = [0.5, 1.0, 2.0];
    let mut reports = Vec::new();
    for (i, &ell) in [0.0, 1.0, 4.0].iter().enumerate() {
        reports.push(baby_iso_check(ell, &lambdas, b.baby_iso_samples, sub_seed(seed, &format!("baby-{i}")))?);
    }
    let worst = reports
        .iter()
        .flat_map(|r| &r.rows)
        .map(|r| ((r.lhs - r.closed_form) / r.lhs_stderr).abs().max(((r.rhs - r.closed_form) / r.rhs_stderr).abs()))
        .fold(0.0, f64::max);
    let pass = reports.iter().all(|r| r.pass);
    outcome(2, "baby isomorphism Laplace transform", pass, format!("9 (ℓ, λ) pairs, worst gap {worst:.2} se"), &reports)
}

pub fn coupling_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let tree = graphs::random_tree(50, 50);
    let r = coupling_check(&tree, 1.0, b.coupling_samples, seed)?;
    let min_p = r
        .local_time_ks
        .iter()
        .chain(&r.field_ks)
        .map(|k| k.p_value)
        .fold(1.0, f64::min);
    let summary = format!(
        "{} violations over {} coupled samples, min KS p = {:.2e} (level {:.1e})",
        r.violations, r.sample_count, min_p, r.ks_level
    );
    outcome(3, "tree coupling domination", r.pass, summary, &r)
}

pub fn sampler_trees() -> Vec<(String, Network)> {
    vec![
        ("random-tree-30".into(), graphs::random_tree(30, 30)),
        ("binary-depth-3".into(), graphs::binary_tree(3)),
        ("star-12".into(), graphs::star(12)),
        ("path-20".into(), graphs::path(20)),
    ]
}

pub fn sampler_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let mut reports = Vec::new();
    for (i, (label, tree)) in sampler_trees().into_iter().enumerate() {
        reports.push((label, recursive_sampler_check(&tree, 1.0, b.sampler_samples, sub_seed(seed, &format!("tree-{i}")))?));
    }
    let min_ratio = reports
        .iter()
        .flat_map(|(_, r)| r.ks.iter().map(move |k| k.p_value / r.ks_level))
        .fold(f64::INFINITY, f64::min);
    let pass = reports.iter().all(|(_, r)| r.pass);
    outcome(4, "recursive tree sampler", pass, format!("{} trees, min KS p / level = {min_ratio:.3}", reports.len()), &reports)
}

pub fn best_criterion(b: &Budget) -> Result<CriterionOutcome> {
    let s = best_sweep(b.best_vertices, b.best_cap)?;
    let summary = format!(
        "{} graphs (≤ {} vertices, multiplicity ≤ {}): {} count mismatches, {} root-dependent, {} non-integral",
        s.graphs, s.max_vertices, s.cap, s.count_mismatches, s.root_dependence, s.non_integral
    );
    outcome(5, "BEST theorem sweep", s.pass, summary, &s)
}

/// Weighted diamond used by the path-weight invariance check.
pub fn invariance_network() -> Network {
    Network::from_edges(
        4,
        [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (3, 0, 1.5), (0, 2, 0.75)],
        0,
    )
    .expect("connected")
}

pub fn invariance_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let r = wp_invariance_check(&invariance_network(), 1.5, b.invariance_paths, 5, seed)?;
    let summary = format!(
        "{} reversals on {} paths ({} changed the path), max |Δ ln W| = {:.1e}",
        r.reversals, r.paths, r.distinct, r.max_log_gap
    );
    outcome(6, "path weight cycle-reversal invariance", r.pass, summary, &r)
}

pub fn path_law_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let r = walk_law_consistency(&graphs::path(2), &[1.0, 1.0], 0.1, b.path_law_runs, DEFAULT_TRAVERSE_CAP, seed)?;
    let summary = format!(
        "{} of {} runs in the ±10% bin, {} paths, max |z| = {:.2}",
        r.kept,
        r.runs,
        r.rows.len(),
        r.max_abs_z
    );
    outcome(7, "conditioned path law", r.pass, summary, &r)
}

pub fn line_ratio(b: &Budget, seed: u64) -> Result<RatioPoint> {
    let n = b.line_vertices;
    cover_ratio(
        &format!("line-{n}"),
        &graphs::path(n),
        path_worst_start(n),
        b.gff_samples,
        b.line_cover_runs,
        seed,
    )
}

pub fn line_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let p = line_ratio(b, seed)?;
    let (lo, hi) = LINE_RATIO_BAND;
    let pass = (lo..=hi).contains(&p.ratio);
    let summary = format!(
        "n = {}: ratio {:.4} ± {:.4} (band [{lo}, {hi}], asymptote 5π/8 = {:.4})",
        b.line_vertices,
        p.ratio,
        p.ratio_stderr,
        5.0 * std::f64::consts::PI / 8.0
    );
    outcome(8, "line graph negative control", pass, summary, &p)
}

pub fn tree_ratios(b: &Budget, seed: u64) -> Result<Vec<RatioPoint>> {
    b.tree_depths
        .iter()
        .map(|&h| {
            let tree = graphs::binary_tree(h);
            let start = deepest_vertex(&tree)?;
            cover_ratio(
                &format!("binary-depth-{h}"),
                &tree,
                start,
                b.gff_samples,
                b.tree_cover_runs,
                sub_seed(seed, &format!("depth-{h}")),
            )
        })
        .collect()
}

pub fn tree_trend_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let pts = tree_ratios(b, seed)?;
    let decreasing = pts.windows(2).all(|w| w[1].ratio < w[0].ratio);
    let last = pts.last().map_or(f64::INFINITY, |p| p.ratio);
    let pass = decreasing && last <= TREE_RATIO_CEILING;
    let summary = pts
        .iter()
        .map(|p| format!("{} {:.4}±{:.4}", p.label, p.ratio, p.ratio_stderr))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(9, "binary tree ratio trend", pass, summary, &pts)
}

pub fn tail_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let rows = inverse_local_time_tails(&graphs::binary_tree(6), 1.0, &[1.0, 2.0, 4.0, 8.0], b.tail_runs, seed)?;
    let pass = rows.iter().all(|r| r.empirical <= r.bound + 4.0 * r.stderr);
    let summary = rows
        .iter()
        .map(|r| format!("λ={}: {:.4} ≤ {:.3}", r.lambda, r.empirical, r.bound))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(10, "inverse local time concentration", pass, summary, &rows)
}

pub fn detection_network() -> Network {
    graphs::random_cubic_like(30, 30)
}

pub fn detection_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let net = detection_network();
    let r = detection_experiment(&net, 0.5, b.detection_samples, seed)?;
    let summary = format!(
        "Δ = {}: window probability {:.3e} ± {:.1e} vs bound {:.1e}",
        r.max_degree, r.empirical_probability, r.stderr, r.bound
    );
    outcome(11, "GFF detection window", r.pass && r.max_degree == 3, summary, &r)
}

/// Networks whose commute identity is checked.
pub fn test_networks() -> Vec<(String, Network)> {
    let mut nets = small_connected_graphs();
    nets.extend([
        ("path-12".to_string(), graphs::path(12)),
        ("cycle-9".into(), graphs::cycle(9)),
        ("star-7".into(), graphs::star(7)),
        ("grid-4x3".into(), graphs::grid(4, 3)),
        ("binary-depth-4".into(), graphs::binary_tree(4)),
        ("random-tree-25".into(), graphs::random_tree(25, 25)),
        ("cubic-like-20".into(), graphs::random_cubic_like(20, 20)),
        ("weighted-diamond".into(), invariance_network()),
    ]);
    nets
}

#[derive(Debug, Clone, Serialize)]
struct OracleDetail {
    commute: Vec<super::checks::CommuteCheck>,
    cover: super::checks::CoverOracleReport,
}

pub fn oracle_criterion(b: &Budget, seed: u64) -> Result<CriterionOutcome> {
    let commute = test_networks()
        .iter()
        .map(|(l, n)| commute_identity_check(l, n))
        .collect::<Result<Vec<_>>>()?;
    let worst = commute.iter().map(|c| c.max_relative_error).fold(0.0, f64::max);
    let cover = cover_oracle_check(&small_connected_graphs(), b.oracle_runs, 3.0, seed)?;
    let pass = worst <= 1e-9 && cover.pass;
    let summary = format!(
        "commute identity worst relative error {worst:.1e} over {} nets; cover time worst |z| = {:.2} over {} starts",
        commute.len(),
        cover.max_abs_z,
        cover.rows.len()
    );
    outcome(12, "exact oracles", pass, summary, &OracleDetail { commute, cover })
}

pub type CriterionFn = fn(&Budget, u64) -> Result<CriterionOutcome>;

/// All criteria in order, each with its own sub-seed.
pub fn all_criteria() -> Vec<(u32, CriterionFn)> {
    vec![
        (1, ray_knight_criterion),
        (2, baby_iso_criterion),
        (3, coupling_criterion),
        (4, sampler_criterion),
        (5, |b, _| best_criterion(b)),
        (6, invariance_criterion),
        (7, path_law_criterion),
        (8, line_criterion),
        (9, tree_trend_criterion),
        (10, tail_criterion),
        (11, detection_criterion),
        (12, oracle_criterion),
    ]
}

pub fn criterion_seed(seed: u64, id: u32) -> u64 {
    sub_seed(seed, &format!("criterion-{id}"))
}

pub fn evaluate_all(b: &Budget, seed: u64) -> Result<Vec<CriterionOutcome>> {
    all_criteria()
        .into_iter()
        .map(|(id, f)| f(b, criterion_seed(seed, id)))
        .collect()
}
