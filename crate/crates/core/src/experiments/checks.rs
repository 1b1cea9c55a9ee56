//! Verification sweeps shared by the suites, the CLI and the acceptance run.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eulerian::{
    arborescence_count, best_circuit_count, brute_force_circuits, eulerian_multigraphs, path_count, path_weight,
    reverse_segment, WeightForm,
};
use crate::network::Network;
use crate::rng::{stream_rng, sub_seed};
use crate::spectral::{effective_resistance, hitting_time};
use crate::stats::{ks_one_sample, ks_two_sample, normal_cdf, Welford};
use crate::tree::{coupled_runs, domination_violations, recursive_local_time_runs};
use crate::walk::{cover_time_runs, exact_cover_time, inverse_local_time_runs, simulate_to_inverse_local_time, Backend};

/// Family-wise KS level, split evenly over the vertices tested.
pub const KS_FAMILY_LEVEL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct MarginalKs {
    pub vertex: usize,
    pub statistic: f64,
    pub p_value: f64,
}

fn min_p(rows: &[MarginalKs]) -> f64 {
    rows.iter().map(|r| r.p_value).fold(1.0, f64::min)
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingReport {
    pub t: f64,
    pub sample_count: usize,
    pub violations: usize,
    /// Coupled `ℓ_v` against walk local times.
    pub local_time_ks: Vec<MarginalKs>,
    /// Coupled `η_v` against `N(0, R_eff(root, v))`.
    pub field_ks: Vec<MarginalKs>,
    pub ks_level: f64,
    pub pass: bool,
}

/// Pathwise domination of the quantile coupling plus its marginals.
pub fn coupling_check(tree: &Network, t: f64, count: usize, seed: u64) -> Result<CouplingReport> {
    let pairs = coupled_runs(tree, t, count, sub_seed(seed, "coupled"))?;
    let walks = inverse_local_time_runs(tree, t, count, Backend::Excursion, sub_seed(seed, "walk"))?;
    let violations = pairs
        .iter()
        .map(|(field, eta)| domination_violations(field, eta).len())
        .sum();
    let root = tree.root();
    let others: Vec<usize> = (0..tree.vertex_count()).filter(|&v| v != root).collect();
    let mut local_time_ks = Vec::new();
    let mut field_ks = Vec::new();
    for &v in &others {
        let a: Vec<f64> = pairs.iter().map(|p| p.0.ell[v]).collect();
        let b: Vec<f64> = walks.iter().map(|w| w.local_times[v]).collect();
        let ks = ks_two_sample(&a, &b);
        local_time_ks.push(MarginalKs { vertex: v, statistic: ks.statistic, p_value: ks.p_value });
        let sd = effective_resistance(tree, root, v)?.sqrt();
        let eta: Vec<f64> = pairs.iter().map(|p| p.1[v]).collect();
        let ks = ks_one_sample(&eta, |x| normal_cdf(x / sd));
        field_ks.push(MarginalKs { vertex: v, statistic: ks.statistic, p_value: ks.p_value });
    }
    let level = KS_FAMILY_LEVEL / (2 * others.len()).max(1) as f64;
    Ok(CouplingReport {
        t,
        sample_count: count,
        violations,
        pass: violations == 0 && min_p(&local_time_ks) >= level && min_p(&field_ks) >= level,
        local_time_ks,
        field_ks,
        ks_level: level,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplerReport {
    pub vertex_count: usize,
    pub t: f64,
    pub sample_count: usize,
    pub ks: Vec<MarginalKs>,
    pub ks_level: f64,
    /// `E ℓ_v = t` for the recursive sampler, worst `|gap| / stderr`.
    pub worst_mean_z: f64,
    pub pass: bool,
}

/// Recursive compound-Poisson sampler against full walk simulation.
pub fn recursive_sampler_check(tree: &Network, t: f64, count: usize, seed: u64) -> Result<SamplerReport> {
    let fields = recursive_local_time_runs(tree, t, count, sub_seed(seed, "recursive"))?;
    let walks = inverse_local_time_runs(tree, t, count, Backend::Excursion, sub_seed(seed, "walk"))?;
    let root = tree.root();
    let others: Vec<usize> = (0..tree.vertex_count()).filter(|&v| v != root).collect();
    let mut ks = Vec::new();
    let mut worst_mean_z: f64 = 0.0;
    for &v in &others {
        let a: Vec<f64> = fields.iter().map(|f| f.ell[v]).collect();
        let b: Vec<f64> = walks.iter().map(|w| w.local_times[v]).collect();
        let r = ks_two_sample(&a, &b);
        ks.push(MarginalKs { vertex: v, statistic: r.statistic, p_value: r.p_value });
        let w: Welford = a.iter().copied().collect();
        worst_mean_z = worst_mean_z.max((w.mean() - t).abs() / w.stderr());
    }
    let level = KS_FAMILY_LEVEL / others.len().max(1) as f64;
    Ok(SamplerReport {
        vertex_count: tree.vertex_count(),
        t,
        sample_count: count,
        pass: min_p(&ks) >= level && worst_mean_z <= 5.0,
        ks,
        ks_level: level,
        worst_mean_z,
    })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BestSweep {
    pub max_vertices: usize,
    pub cap: u32,
    pub graphs: usize,
    /// BEST count differs from brute-force enumeration.
    pub count_mismatches: usize,
    /// `ar_w` differs between roots.
    pub root_dependence: usize,
    /// `ec_{v0} / Π j!` fails to be an integer.
    pub non_integral: usize,
    pub pass: bool,
}

/// BEST count, root independence of the arborescence count and integrality
/// of the path count over every Eulerian multigraph in range.
pub fn best_sweep(max_vertices: usize, cap: u32) -> Result<BestSweep> {
    let mut s = BestSweep {
        max_vertices,
        cap,
        ..BestSweep::default()
    };
    for n in 2..=max_vertices {
        for g in eulerian_multigraphs(n, cap) {
            s.graphs += 1;
            let best = best_circuit_count(&g);
            let ars: Vec<_> = (0..n).map(|w| arborescence_count(&g, w)).collect::<Result<_>>()?;
            if ars.windows(2).any(|p| p[0] != p[1]) {
                s.root_dependence += 1;
            }
            match best {
                Ok(b) => {
                    if brute_force_circuits(&g, cap)? != b.circuits {
                        s.count_mismatches += 1;
                    }
                }
                Err(Error::Internal(_)) => s.root_dependence += 1,
                Err(e) => return Err(e),
            }
            for v0 in 0..n {
                match path_count(&g, v0) {
                    Ok(_) => {}
                    Err(Error::Internal(_)) => s.non_integral += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    s.pass = s.graphs > 0 && s.count_mismatches == 0 && s.root_dependence == 0 && s.non_integral == 0;
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub paths: usize,
    pub reversals: usize,
    /// Reversals that produced a different vertex sequence.
    pub distinct: usize,
    pub max_log_gap: f64,
    pub pass: bool,
}

/// `W_P` under reversal of closed sub-walks of simulated covering paths.
/// Walks that miss a vertex are skipped; up to `per_path` cycles are
/// reversed per path.
pub fn wp_invariance_check(net: &Network, t: f64, paths: usize, per_path: usize, seed: u64) -> Result<InvarianceReport> {
    let n = net.vertex_count();
    let mut collected = 0;
    let mut reversals = 0;
    let mut distinct = 0;
    let mut max_log_gap: f64 = 0.0;
    let mut attempt = 0u64;
    let attempt_cap = 100 * paths as u64 + 1000;
    while collected < paths {
        if attempt >= attempt_cap {
            return Err(Error::invalid("walks rarely cover the network; raise t"));
        }
        let tr = simulate_to_inverse_local_time(net, t, derive_attempt_seed(seed, attempt))?;
        attempt += 1;
        if tr.local_times.iter().any(|&l| l <= 0.0) {
            continue;
        }
        collected += 1;
        let base = path_weight(&tr.path, &tr.local_times, net, WeightForm::Normalized)?;
        let mut cycles: Vec<(usize, usize)> = Vec::new();
        for i in 1..tr.path.len() - 1 {
            if let Some(d) = tr.path[i + 1..tr.path.len() - 1].iter().position(|&x| x == tr.path[i]) {
                cycles.push((i, i + 1 + d));
            }
        }
        let mut rng = stream_rng(seed, 0x3F1, attempt);
        cycles.shuffle(&mut rng);
        for &(i, j) in cycles.iter().take(per_path) {
            let q = reverse_segment(&tr.path, i, j)?;
            if q != tr.path {
                distinct += 1;
            }
            let w = path_weight(&q, &tr.local_times, net, WeightForm::Normalized)?;
            max_log_gap = max_log_gap.max((w.log_value - base.log_value).abs());
            reversals += 1;
        }
        debug_assert_eq!(tr.local_times.len(), n);
    }
    Ok(InvarianceReport {
        paths,
        reversals,
        distinct,
        max_log_gap,
        pass: reversals > 0 && max_log_gap <= 1e-9,
    })
}

fn derive_attempt_seed(seed: u64, attempt: u64) -> u64 {
    crate::rng::derive_seed(seed, 0x3F0, attempt)
}

#[derive(Debug, Clone, Serialize)]
pub struct CommuteCheck {
    pub label: String,
    pub pairs: usize,
    /// Largest `|t_hit(u,v) + t_hit(v,u) − c_sum R_eff(u,v)| / (c_sum R_eff)`.
    pub max_relative_error: f64,
}

/// `t_hit(u,v) + t_hit(v,u) = (Σ_x c_x) R_eff(u,v)` over all pairs.
pub fn commute_identity_check(label: &str, net: &Network) -> Result<CommuteCheck> {
    let n = net.vertex_count();
    let total = net.conductance_sum();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for u in 0..n {
        for v in u + 1..n {
            let kappa = hitting_time(net, u, v)? + hitting_time(net, v, u)?;
            let expected = total * effective_resistance(net, u, v)?;
            worst = worst.max((kappa - expected).abs() / expected);
            pairs += 1;
        }
    }
    Ok(CommuteCheck {
        label: label.into(),
        pairs,
        max_relative_error: worst,
    })
}

/// Connected unit graphs on 2 to 4 vertices, one per isomorphism class.
pub fn small_connected_graphs() -> Vec<(String, Network)> {
    let specs: [(&str, usize, &[(usize, usize)]); 8] = [
        ("edge", 2, &[(0, 1)]),
        ("path-3", 3, &[(0, 1), (1, 2)]),
        ("triangle", 3, &[(0, 1), (1, 2), (0, 2)]),
        ("path-4", 4, &[(0, 1), (1, 2), (2, 3)]),
        ("star-4", 4, &[(0, 1), (0, 2), (0, 3)]),
        ("cycle-4", 4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
        ("paw", 4, &[(0, 1), (1, 2), (2, 0), (2, 3)]),
        ("diamond", 4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]),
    ];
    let mut out: Vec<(String, Network)> = specs
        .iter()
        .map(|(name, n, edges)| {
            let net = Network::unit(*n, edges.iter().copied(), 0).expect("valid small graph");
            (name.to_string(), net)
        })
        .collect();
    out.push(("complete-4".into(), crate::graphs::complete(4)));
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverOracleRow {
    pub label: String,
    pub start: usize,
    pub exact: f64,
    pub simulated: f64,
    pub stderr: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverOracleReport {
    pub runs: usize,
    pub sigmas: f64,
    pub rows: Vec<CoverOracleRow>,
    pub max_abs_z: f64,
    pub pass: bool,
}

/// Simulated mean cover time against the absorbing-chain value from every
/// start of every listed network.
pub fn cover_oracle_check(nets: &[(String, Network)], runs: usize, sigmas: f64, seed: u64) -> Result<CoverOracleReport> {
    let mut rows = Vec::new();
    for (k, (label, net)) in nets.iter().enumerate() {
        for start in 0..net.vertex_count() {
            let (exact, _) = exact_cover_time(net, start)?;
            let sims = cover_time_runs(net, start, runs, sub_seed(seed, &format!("{k}-{start}")))?;
            let w: Welford = sims.iter().map(|s| s.0).collect();
            let z = if w.stderr() > 0.0 { (w.mean() - exact) / w.stderr() } else { 0.0 };
            rows.push(CoverOracleRow {
                label: label.clone(),
                start,
                exact,
                simulated: w.mean(),
                stderr: w.stderr(),
                z,
            });
        }
    }
    let max_abs_z = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    Ok(CoverOracleReport {
        runs,
        sigmas,
        pass: max_abs_z <= sigmas,
        rows,
        max_abs_z,
    })
}
