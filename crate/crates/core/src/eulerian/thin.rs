//! Thin points of the embedded path given small local times.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::Network;
use crate::rng::par_replicas;
use crate::stats::binomial_stderr;
use crate::walk::{Backend, Walker, WALK_STREAM};

/// A vertex with `k_v ≤ 1118 |N_v|` visits counts as thin.
pub const THIN_FACTOR: u64 = 1118;

/// Upper edges of the local-time bins.
const LOCAL_TIME_BINS: [f64; 4] = [1.0 / 64.0, 1.0 / 16.0, 0.25, f64::INFINITY];

#[derive(Debug, Clone, Serialize)]
pub struct ThinBin {
    pub vertex: usize,
    /// `[lower, upper)` range of `L^v` for this bin.
    pub local_time_range: (f64, f64),
    pub threshold: u64,
    pub samples: usize,
    pub thin_probability: f64,
    pub stderr: f64,
    /// `k_v → count`.
    pub visit_histogram: BTreeMap<u64, usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThinPointReport {
    pub t: f64,
    pub runs: usize,
    pub bins: Vec<ThinBin>,
    pub pass: bool,
}

/// Walks to `τ(t)`; for every vertex `v` with `L^v > 0` and
/// `L^v L^u c_uv² ≤ 1/16` for all neighbours `u`, bins by `L^v` and reports
/// the frequency of `k_v ≤ 1118 |N_v|` (asserted `≥ 1/2 − 4·stderr`).
pub fn thin_point_consistency(net: &Network, t: f64, runs: usize, seed: u64) -> Result<ThinPointReport> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t must be positive and finite"));
    }
    let n = net.vertex_count();
    let walker = Walker::new(net);
    let per_run: Vec<Vec<(usize, usize, u64)>> = par_replicas(runs, seed, WALK_STREAM, |_, rng| {
        let tr = walker
            .inverse_local_time(t, Backend::Excursion, rng)
            .expect("positive t");
        let mut visits = vec![0u64; n];
        for &v in &tr.path[1..] {
            visits[v] += 1;
        }
        let lt = &tr.local_times;
        (0..n)
            .filter(|&v| lt[v] > 0.0)
            .filter(|&v| {
                net.neighbors(v)
                    .all(|(u, c)| lt[v] * lt[u] * c * c <= 1.0 / 16.0)
            })
            .map(|v| {
                let bin = LOCAL_TIME_BINS.iter().position(|&b| lt[v] < b).unwrap_or(3);
                (v, bin, visits[v])
            })
            .collect()
    });
    let mut grouped: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for (v, bin, k) in per_run.into_iter().flatten() {
        grouped.entry((v, bin)).or_default().push(k);
    }
    let bins: Vec<ThinBin> = grouped
        .into_iter()
        .map(|((v, bin), ks)| {
            let threshold = THIN_FACTOR * net.degree(v) as u64;
            let thin = ks.iter().filter(|&&k| k <= threshold).count();
            let p = thin as f64 / ks.len() as f64;
            let se = binomial_stderr(p, ks.len());
            let mut hist = BTreeMap::new();
            for &k in &ks {
                *hist.entry(k).or_insert(0) += 1;
            }
            let lower = if bin == 0 { 0.0 } else { LOCAL_TIME_BINS[bin - 1] };
            ThinBin {
                vertex: v,
                local_time_range: (lower, LOCAL_TIME_BINS[bin]),
                threshold,
                samples: ks.len(),
                thin_probability: p,
                stderr: se,
                visit_histogram: hist,
                pass: p >= 0.5 - 4.0 * se,
            }
        })
        .collect();
    Ok(ThinPointReport {
        t,
        runs,
        pass: bins.iter().all(|b| b.pass),
        bins,
    })
}
