//! Continuous-time random walk with unit-rate exponential holdings.
//!
//! Jumps from `v` go to `u` with probability `c_vu / c_v`. Self-loop jumps
//! leave the walk in place; the embedded path records only moves between
//! distinct vertices, so one entry of `holding_times` is a whole sojourn,
//! `Exp(č_v / c_v)` in real time. Local time at `v` is real time spent
//! there divided by `c_v`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::Network;
use crate::rng::{par_replicas, stream_rng};
use crate::spectral::resistance_matrix;
use crate::stats::{binomial_stderr, Welford};

pub(crate) const WALK_STREAM: u64 = 0x3A1C;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Literal CTRW: every jump, self-loops included, gets an `Exp(1)` holding.
    EventDriven,
    /// `N ~ Poisson(č_{v0} t)` independent excursions with uniform marks.
    #[default]
    Excursion,
}

/// One walk observed up to an anchoring time.
#[derive(Debug, Clone, Serialize)]
pub struct WalkTrace {
    /// `S_0 .. S_K`, consecutive entries distinct.
    pub path: Vec<usize>,
    /// Real time spent at `path[k]` before the next move; the last entry is
    /// the unfinished sojourn at the anchoring time.
    pub holding_times: Vec<f64>,
    pub local_times: Vec<f64>,
    pub total_time: f64,
    /// `(start, end)` indices into `path` of each root-to-root excursion.
    pub excursions: Vec<(usize, usize)>,
    /// Local time at the root when each excursion starts.
    pub marks: Vec<f64>,
    /// `Some(t)` when the trace stops at `τ(t)`.
    pub anchor: Option<f64>,
}

impl WalkTrace {
    pub fn excursion_count(&self) -> usize {
        self.excursions.len()
    }
}

/// Traverse counts of the embedded path.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PathStats {
    /// `k_{u,v}`: number of moves `u → v`.
    pub traverse_counts: BTreeMap<(usize, usize), u64>,
    /// `k_v = Σ_u k_{u,v}`. For a closed path at the root this is also the
    /// number of departures from the root.
    pub visit_counts: Vec<u64>,
}

impl PathStats {
    pub fn traverses(&self, u: usize, v: usize) -> u64 {
        self.traverse_counts.get(&(u, v)).copied().unwrap_or(0)
    }

    /// In-traverses equal out-traverses at every vertex.
    pub fn is_balanced(&self) -> bool {
        let n = self.visit_counts.len();
        let mut out = vec![0u64; n];
        for (&(u, _), &k) in &self.traverse_counts {
            out[u] += k;
        }
        out == self.visit_counts
    }
}

pub fn path_stats(trace: &WalkTrace, vertex_count: usize) -> PathStats {
    let mut stats = PathStats {
        traverse_counts: BTreeMap::new(),
        visit_counts: vec![0; vertex_count],
    };
    for w in trace.path.windows(2) {
        *stats.traverse_counts.entry((w[0], w[1])).or_insert(0) += 1;
        stats.visit_counts[w[1]] += 1;
    }
    stats
}

pub fn excursion_marks(trace: &WalkTrace) -> Result<Vec<f64>> {
    trace.anchor.ok_or(Error::UnanchoredTrace)?;
    Ok(trace.marks.clone())
}

/// Precomputed jump tables.
#[derive(Debug, Clone)]
pub struct Walker<'a> {
    net: &'a Network,
    targets: Vec<Vec<usize>>,
    cumulative: Vec<Vec<f64>>,
}

impl<'a> Walker<'a> {
    pub fn new(net: &'a Network) -> Self {
        let n = net.vertex_count();
        let mut targets = Vec::with_capacity(n);
        let mut cumulative = Vec::with_capacity(n);
        for v in 0..n {
            let mut acc = 0.0;
            let (t, c): (Vec<usize>, Vec<f64>) = net
                .neighbors(v)
                .map(|(u, w)| {
                    acc += w;
                    (u, acc)
                })
                .unzip();
            targets.push(t);
            cumulative.push(c);
        }
        Walker { net, targets, cumulative }
    }

    pub fn network(&self) -> &Network {
        self.net
    }

    /// Next distinct vertex, chosen with probability `c_vu / č_v`.
    pub fn step<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> usize {
        let cum = &self.cumulative[v];
        let x = rng.gen::<f64>() * cum[cum.len() - 1];
        let i = cum.partition_point(|&c| c <= x).min(cum.len() - 1);
        self.targets[v][i]
    }

    /// Real time of one sojourn at `v`, `Exp(č_v / c_v)`.
    pub fn sojourn<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> f64 {
        let e: f64 = Exp1.sample(rng);
        e * self.net.total_conductance(v) / self.net.escape_conductance(v)
    }

    fn trace_from_path(&self, path: Vec<usize>, holding_times: Vec<f64>, marks: Vec<f64>, anchor: f64) -> WalkTrace {
        let n = self.net.vertex_count();
        let root = self.net.root();
        let mut real = vec![0.0; n];
        for (&v, &h) in path.iter().zip(&holding_times) {
            real[v] += h;
        }
        let local_times: Vec<f64> = (0..n).map(|v| real[v] / self.net.total_conductance(v)).collect();
        let mut excursions = Vec::with_capacity(marks.len());
        let mut start = 0;
        for (k, &v) in path.iter().enumerate().skip(1) {
            if v == root {
                excursions.push((start, k));
                start = k;
            }
        }
        WalkTrace {
            path,
            total_time: holding_times.iter().sum(),
            holding_times,
            local_times,
            excursions,
            marks,
            anchor: Some(anchor),
        }
    }

    /// Walk from the root until the root's local time reaches `t`.
    pub fn inverse_local_time<R: Rng + ?Sized>(&self, t: f64, backend: Backend, rng: &mut R) -> Result<WalkTrace> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid("t must be positive and finite"));
        }
        Ok(match backend {
            Backend::Excursion => self.ilt_excursions(t, rng),
            Backend::EventDriven => self.ilt_event_driven(t, rng),
        })
    }

    fn ilt_excursions<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> WalkTrace {
        let root = self.net.root();
        let c_root = self.net.total_conductance(root);
        let rate = self.net.escape_conductance(root) * t;
        let count = if rate > 0.0 {
            Poisson::new(rate).expect("positive mean").sample(rng) as usize
        } else {
            0
        };
        let mut marks: Vec<f64> = (0..count).map(|_| rng.gen::<f64>() * t).collect();
        marks.sort_by(f64::total_cmp);

        let mut path = vec![root];
        let mut holding = Vec::new();
        let mut last_mark = 0.0;
        for &m in &marks {
            holding.push((m - last_mark) * c_root);
            last_mark = m;
            let mut v = self.step(root, rng);
            while v != root {
                path.push(v);
                holding.push(self.sojourn(v, rng));
                v = self.step(v, rng);
            }
            path.push(root);
        }
        holding.push((t - last_mark) * c_root);
        let mut trace = self.trace_from_path(path, holding, marks, t);
        // exact by construction; avoid rounding from the sum of gaps
        trace.local_times[root] = t;
        trace
    }

    fn ilt_event_driven<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> WalkTrace {
        let root = self.net.root();
        let c_root = self.net.total_conductance(root);
        let limit = t * c_root;
        let mut root_real = 0.0;
        let mut path = vec![root];
        let mut holding = vec![0.0];
        let mut marks = Vec::new();
        let mut v = root;
        loop {
            let h: f64 = Exp1.sample(rng);
            if v == root && root_real + h >= limit {
                *holding.last_mut().unwrap() += limit - root_real;
                break;
            }
            *holding.last_mut().unwrap() += h;
            if v == root {
                root_real += h;
            }
            let c_v = self.net.total_conductance(v);
            if rng.gen::<f64>() * c_v < self.net.self_loop(v) {
                continue;
            }
            if v == root {
                marks.push(root_real / c_root);
            }
            v = self.step(v, rng);
            path.push(v);
            holding.push(0.0);
        }
        let mut trace = self.trace_from_path(path, holding, marks, t);
        trace.local_times[root] = t;
        trace
    }

    /// `(τ_cov, first return to start after τ_cov)` from `start`.
    pub fn cover_time<R: Rng + ?Sized>(&self, start: usize, rng: &mut R) -> (f64, f64) {
        let n = self.net.vertex_count();
        if n == 1 {
            return (0.0, 0.0);
        }
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut remaining = n - 1;
        let mut time = 0.0;
        let mut v = start;
        while remaining > 0 {
            time += self.sojourn(v, rng);
            v = self.step(v, rng);
            if !seen[v] {
                seen[v] = true;
                remaining -= 1;
            }
        }
        let cover = time;
        while v != start {
            time += self.sojourn(v, rng);
            v = self.step(v, rng);
        }
        (cover, time)
    }
}

pub fn simulate_to_inverse_local_time(net: &Network, t: f64, seed: u64) -> Result<WalkTrace> {
    simulate_to_inverse_local_time_with(net, t, Backend::default(), seed)
}

pub fn simulate_to_inverse_local_time_with(net: &Network, t: f64, backend: Backend, seed: u64) -> Result<WalkTrace> {
    Walker::new(net).inverse_local_time(t, backend, &mut stream_rng(seed, WALK_STREAM, 0))
}

pub fn simulate_cover_time(net: &Network, start: usize, seed: u64) -> Result<(f64, f64)> {
    net.check_vertex(start)?;
    Ok(Walker::new(net).cover_time(start, &mut stream_rng(seed, WALK_STREAM, 0)))
}

/// Per-run summary of `runs` independent walks to `τ(t)`; run `i` uses
/// stream `(seed, i)`.
#[derive(Debug, Clone, Serialize)]
pub struct IltRun {
    pub total_time: f64,
    pub excursion_count: usize,
    pub local_times: Vec<f64>,
}

pub fn inverse_local_time_runs(net: &Network, t: f64, runs: usize, backend: Backend, seed: u64) -> Result<Vec<IltRun>> {
    if !(t > 0.0) {
        return Err(Error::invalid("t must be positive"));
    }
    let walker = Walker::new(net);
    Ok(par_replicas(runs, seed, WALK_STREAM, |_, rng| {
        let tr = walker
            .inverse_local_time(t, backend, rng)
            .expect("t validated above");
        IltRun {
            total_time: tr.total_time,
            excursion_count: tr.excursion_count(),
            local_times: tr.local_times,
        }
    }))
}

pub fn cover_time_runs(net: &Network, start: usize, runs: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    net.check_vertex(start)?;
    let walker = Walker::new(net);
    Ok(par_replicas(runs, seed, WALK_STREAM, |_, rng| walker.cover_time(start, rng)))
}

/// Exact `E τ_cov` and `E[cover and return]` from `start` by first-step
/// analysis on the chain (position, visited set). Limited to 10 vertices.
pub fn exact_cover_time(net: &Network, start: usize) -> Result<(f64, f64)> {
    net.check_vertex(start)?;
    let n = net.vertex_count();
    if n > 10 {
        return Err(Error::invalid("exact cover time is limited to 10 vertices"));
    }
    if n == 1 {
        return Ok((0.0, 0.0));
    }
    let full = (1usize << n) - 1;
    let hit_start = crate::spectral::hitting_times_to(net, start)?;
    // Process visited sets from largest to smallest; within a set, solve the
    // linear system over positions in the set.
    let mut cover = vec![vec![0.0; n]; 1 << n];
    let mut ret = vec![vec![0.0; n]; 1 << n];
    for v in 0..n {
        ret[full][v] = hit_start[v];
    }
    let mut sets: Vec<usize> = (1..full).collect();
    sets.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
    for set in sets {
        let members: Vec<usize> = (0..n).filter(|v| set >> v & 1 == 1).collect();
        let m = members.len();
        let index = |v: usize| members.iter().position(|&w| w == v);
        let mut a = nalgebra::DMatrix::<f64>::identity(m, m);
        let mut b_cov = nalgebra::DVector::<f64>::zeros(m);
        let mut b_ret = nalgebra::DVector::<f64>::zeros(m);
        for (i, &v) in members.iter().enumerate() {
            let esc = net.escape_conductance(v);
            b_cov[i] = net.total_conductance(v) / esc;
            b_ret[i] = b_cov[i];
            for (u, c) in net.neighbors(v) {
                let p = c / esc;
                match index(u) {
                    Some(j) => a[(i, j)] -= p,
                    None => {
                        b_cov[i] += p * cover[set | 1 << u][u];
                        b_ret[i] += p * ret[set | 1 << u][u];
                    }
                }
            }
        }
        let lu = a.lu();
        let xc = lu.solve(&b_cov).ok_or_else(|| Error::Singular("cover-time system".into()))?;
        let xr = lu.solve(&b_ret).ok_or_else(|| Error::Singular("cover-time system".into()))?;
        for (i, &v) in members.iter().enumerate() {
            cover[set][v] = xc[i];
            ret[set][v] = xr[i];
        }
    }
    Ok((cover[1 << start][start], ret[1 << start][start]))
}

/// Largest effective resistance over all pairs.
pub fn resistance_diameter(net: &Network) -> Result<f64> {
    Ok(resistance_matrix(net)?.iter().copied().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub lambda: f64,
    pub threshold: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Tail of `|τ(t) − 2t|E||` against `6 e^{−λ/16}` at deviation
/// `(sqrt(λ t R) + λ R) |E|`, with `R` the resistance diameter.
pub fn inverse_local_time_tails(net: &Network, t: f64, lambdas: &[f64], runs: usize, seed: u64) -> Result<Vec<TailRow>> {
    if !net.is_unit() {
        return Err(Error::NotUnitConductance);
    }
    let r = resistance_diameter(net)?;
    let e = net.edge_count() as f64;
    let taus: Vec<f64> = inverse_local_time_runs(net, t, runs, Backend::Excursion, seed)?
        .into_iter()
        .map(|x| x.total_time)
        .collect();
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let threshold = ((lambda * t * r).sqrt() + lambda * r) * e;
            let p = taus.iter().filter(|&&x| (x - 2.0 * t * e).abs() >= threshold).count() as f64 / runs as f64;
            let se = binomial_stderr(p, runs);
            let bound = 6.0 * (-lambda / 16.0).exp();
            TailRow {
                lambda,
                threshold,
                empirical: p,
                stderr: se,
                bound,
                pass: p <= bound + 3.0 * se.max(1.0 / runs as f64),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct SprinklingReport {
    pub runs: usize,
    pub t: f64,
    pub epsilon: f64,
    pub thin_threshold: u64,
    /// Runs with a non-root vertex visited between 1 and `thin_threshold` times.
    pub thin_found: usize,
    /// Among those, frequency of "every excursion through the thin vertex
    /// starts after local time `(1−ε) t`".
    pub late_probability: f64,
    /// Average of `ε^{|I|}` over the same runs.
    pub predicted_probability: f64,
    /// Standard error of `late − predicted`.
    pub stderr: f64,
    pub consistent: bool,
    /// Frequency of `∃ v: K_v ≤ 1118 Δ`.
    pub low_visit_probability: f64,
    /// `1 / (8 Δ 10^Δ)`.
    pub low_visit_bound: f64,
}

pub const LOW_VISIT_FACTOR: u64 = 1118;

pub fn sprinkling_probe(net: &Network, t: f64, epsilon: f64, thin_threshold: u64, runs: usize, seed: u64) -> Result<SprinklingReport> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid("epsilon must lie in (0, 1]"));
    }
    if runs == 0 {
        return Err(Error::invalid("runs must be positive"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t must be positive and finite"));
    }
    let n = net.vertex_count();
    let root = net.root();
    let delta = net.max_degree();
    let low_cap = LOW_VISIT_FACTOR * delta as u64;
    let walker = Walker::new(net);
    let results = par_replicas(runs, seed, WALK_STREAM, |_, rng| {
        let tr = walker
            .inverse_local_time(t, Backend::Excursion, rng)
            .expect("t checked by caller");
        let mut visits = vec![0u64; n];
        for &v in &tr.path[1..] {
            visits[v] += 1;
        }
        let low = (0..n).any(|v| visits[v] <= low_cap);
        let thin = (0..n)
            .filter(|&v| v != root && visits[v] >= 1 && visits[v] <= thin_threshold)
            .min_by_key(|&v| (visits[v], v));
        let outcome = thin.map(|v| {
            let through: Vec<usize> = tr
                .excursions
                .iter()
                .enumerate()
                .filter(|(_, &(a, b))| tr.path[a..=b].contains(&v))
                .map(|(i, _)| i)
                .collect();
            let late = through.iter().all(|&i| tr.marks[i] >= (1.0 - epsilon) * t);
            (late, epsilon.powi(through.len() as i32))
        });
        (low, outcome)
    });
    let low = results.iter().filter(|r| r.0).count() as f64 / runs as f64;
    let mut late = Welford::default();
    let mut pred = Welford::default();
    let mut diff = Welford::default();
    for (l, p) in results.iter().filter_map(|r| r.1) {
        let x = if l { 1.0 } else { 0.0 };
        late.push(x);
        pred.push(p);
        diff.push(x - p);
    }
    let found = late.count() as usize;
    let se = diff.stderr();
    Ok(SprinklingReport {
        runs,
        t,
        epsilon,
        thin_threshold,
        thin_found: found,
        late_probability: late.mean(),
        predicted_probability: pred.mean(),
        stderr: se,
        consistent: found == 0 || diff.mean().abs() <= 4.0 * se.max(1.0 / found as f64),
        low_visit_probability: low,
        low_visit_bound: 1.0 / (8.0 * delta as f64 * 10f64.powi(delta as i32)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs;
    use crate::stats::{ks_one_sample, ks_two_sample, moments};

    #[test]
    fn trace_invariants() {
        let net = graphs::random_cubic_like(10, 2);
        for backend in [Backend::Excursion, Backend::EventDriven] {
            for seed in 0..20 {
                let tr = simulate_to_inverse_local_time_with(&net, 2.0, backend, seed).unwrap();
                assert_eq!(tr.path[0], 0);
                assert_eq!(*tr.path.last().unwrap(), 0);
                assert_eq!(tr.path.len(), tr.holding_times.len());
                assert!((tr.local_times[0] - 2.0).abs() < 1e-9);
                let weighted: f64 = (0..10).map(|v| net.total_conductance(v) * tr.local_times[v]).sum();
                assert!((weighted - tr.total_time).abs() < 1e-9 * tr.total_time.max(1.0));
                assert_eq!(tr.marks.len(), tr.excursions.len());
                assert!(tr.marks.windows(2).all(|w| w[0] <= w[1]));
                assert!(path_stats(&tr, 10).is_balanced());
            }
        }
    }

    #[test]
    fn single_edge_excursions_are_poisson() {
        let net = graphs::path(2);
        let counts: Vec<f64> = inverse_local_time_runs(&net, 1.0, 100_000, Backend::Excursion, 4)
            .unwrap()
            .iter()
            .map(|r| r.excursion_count as f64)
            .collect();
        let m = moments(&counts);
        assert!((m.mean - 1.0).abs() < 3.0 * m.mean_stderr, "{m:?}");
        assert!((m.variance - 1.0).abs() < 3.0 * m.variance_stderr, "{m:?}");
    }

    #[test]
    fn self_loops_reduce_excursion_rate() {
        // c_00 = 2 (one loop), c_01 = 1: č_0 = 1, so N ~ Poisson(t)
        let net = Network::from_edges(2, [(0, 0, 2.0), (0, 1, 1.0)], 0).unwrap();
        for backend in [Backend::Excursion, Backend::EventDriven] {
            let runs = inverse_local_time_runs(&net, 2.0, 40_000, backend, 8).unwrap();
            let counts: Vec<f64> = runs.iter().map(|r| r.excursion_count as f64).collect();
            let m = moments(&counts);
            assert!((m.mean - 2.0).abs() < 4.0 * m.mean_stderr, "{backend:?} {m:?}");
            let l1: Vec<f64> = runs.iter().map(|r| r.local_times[1]).collect();
            let m = moments(&l1);
            assert!((m.mean - 2.0).abs() < 4.0 * m.mean_stderr, "{backend:?} {m:?}");
        }
    }

    #[test]
    fn backends_agree_in_law() {
        let net = graphs::cycle(5);
        let a = inverse_local_time_runs(&net, 1.5, 20_000, Backend::Excursion, 1).unwrap();
        let b = inverse_local_time_runs(&net, 1.5, 20_000, Backend::EventDriven, 2).unwrap();
        let crit = crate::stats::ks_critical_value(0.001, 10_000.0);
        let ta: Vec<f64> = a.iter().map(|r| r.total_time).collect();
        let tb: Vec<f64> = b.iter().map(|r| r.total_time).collect();
        assert!(ks_two_sample(&ta, &tb).statistic < crit);
        let la: Vec<f64> = a.iter().map(|r| r.local_times[2]).collect();
        let lb: Vec<f64> = b.iter().map(|r| r.local_times[2]).collect();
        assert!(ks_two_sample(&la, &lb).statistic < crit);
    }

    #[test]
    fn mean_local_time_is_t() {
        let net = graphs::star(3);
        let runs = inverse_local_time_runs(&net, 3.0, 10_000, Backend::Excursion, 5).unwrap();
        for v in 0..4 {
            let xs: Vec<f64> = runs.iter().map(|r| r.local_times[v]).collect();
            let m = moments(&xs);
            assert!((m.mean - 3.0).abs() < 4.0 * m.mean_stderr.max(1e-12), "{v}: {m:?}");
        }
        let taus: Vec<f64> = runs.iter().map(|r| r.total_time).collect();
        let m = moments(&taus);
        assert!((m.mean - 18.0).abs() < 4.0 * m.mean_stderr);
    }

    #[test]
    fn marks_are_uniform() {
        let net = graphs::path(2);
        let walker = Walker::new(&net);
        let marks: Vec<f64> = par_replicas(10_000, 3, WALK_STREAM, |_, rng| {
            walker.inverse_local_time(5.0, Backend::Excursion, rng).unwrap().marks
        })
        .concat();
        let r = ks_one_sample(&marks, |x| (x / 5.0).clamp(0.0, 1.0));
        assert!(r.statistic < crate::stats::ks_critical_value(0.01, marks.len() as f64), "{r:?}");
    }

    #[test]
    fn path_stats_conventions() {
        let empty = WalkTrace {
            path: vec![0],
            holding_times: vec![1.0],
            local_times: vec![1.0, 0.0],
            total_time: 1.0,
            excursions: vec![],
            marks: vec![],
            anchor: Some(1.0),
        };
        let s = path_stats(&empty, 2);
        assert!(s.traverse_counts.is_empty());
        assert_eq!(s.visit_counts, vec![0, 0]);
        let there_and_back = WalkTrace {
            path: vec![0, 1, 0],
            holding_times: vec![0.5, 1.0, 0.5],
            ..empty.clone()
        };
        let s = path_stats(&there_and_back, 2);
        assert_eq!(s.traverses(0, 1), 1);
        assert_eq!(s.traverses(1, 0), 1);
        assert_eq!(s.visit_counts, vec![1, 1]);
        let unanchored = WalkTrace { anchor: None, ..empty };
        assert!(matches!(excursion_marks(&unanchored), Err(Error::UnanchoredTrace)));
    }

    #[test]
    fn exact_cover_small_cases() {
        // single edge: one holding
        assert_eq!(exact_cover_time(&graphs::path(2), 0).unwrap().0, 1.0);
        // 3-path from the middle: one holding, then end-to-end hitting time 4,
        // then one holding back
        let (c, r) = exact_cover_time(&graphs::path(3), 1).unwrap();
        assert!((c - 5.0).abs() < 1e-12);
        assert!((r - 6.0).abs() < 1e-12);
        // K_n from any vertex: coupon collector (n−1) H_{n−1}
        let (c, _) = exact_cover_time(&graphs::complete(4), 2).unwrap();
        assert!((c - 3.0 * (1.0 + 0.5 + 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn cover_time_matches_exact_oracle() {
        for net in [graphs::path(3), graphs::star(3), graphs::cycle(4)] {
            let (exact, exact_ret) = exact_cover_time(&net, 1).unwrap();
            let runs = cover_time_runs(&net, 1, 40_000, 6).unwrap();
            let c: Vec<f64> = runs.iter().map(|r| r.0).collect();
            let r: Vec<f64> = runs.iter().map(|r| r.1).collect();
            let (mc, mr) = (moments(&c), moments(&r));
            assert!((mc.mean - exact).abs() < 4.0 * mc.mean_stderr, "{exact} {mc:?}");
            assert!((mr.mean - exact_ret).abs() < 4.0 * mr.mean_stderr, "{exact_ret} {mr:?}");
        }
    }

    #[test]
    fn tails_respect_bound() {
        let rows = inverse_local_time_tails(&graphs::cycle(6), 4.0, &[1.0, 2.0, 4.0, 8.0], 5000, 3).unwrap();
        assert!(rows.iter().all(|r| r.pass), "{rows:?}");
    }

    #[test]
    fn sprinkling_single_excursion() {
        // a leaf of the star is visited only by excursions that step to it
        let net = graphs::star(4);
        let r = sprinkling_probe(&net, 0.3, 0.4, 1, 20_000, 2).unwrap();
        assert!(r.thin_found > 1000);
        assert!((r.predicted_probability - 0.4).abs() < 1e-12);
        assert!(r.consistent, "{r:?}");
        let r = sprinkling_probe(&net, 0.3, 1.0, 3, 2000, 2).unwrap();
        assert_eq!(r.late_probability, 1.0);
        assert!(r.low_visit_probability >= r.low_visit_bound);
    }
}
