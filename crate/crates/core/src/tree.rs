//! Local times on trees: the compound Poisson–exponential law, the
//! recursive sampler, and the monotone coupling with the GFF.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::Serialize;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::gff::{estimate_sup_with, GffSample, GffSampler};
use crate::network::{Network, TreeShape};
use crate::rng::{par_replicas, stream_rng, sub_seed};
use crate::stats::{normal_quantile, ols_slope, Welford};
use crate::walk::cover_time_runs;

pub(crate) const TREE_STREAM: u64 = 0x7A3E;

/// Local time field at `τ(t)`; `ell[root] = t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalTimeField {
    pub ell: Vec<f64>,
    pub t: f64,
}

/// Poisson weights below this are dropped from the series.
const SERIES_CUTOFF: f64 = 1e-17;

/// Law of `Σ_{i≤N} Y_i` with `N ~ Poisson(ℓ)`, `Y_i ~ Exp(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompoundPoissonExponential {
    pub rate: f64,
}

impl CompoundPoissonExponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::invalid("rate must be finite and nonnegative"));
        }
        Ok(CompoundPoissonExponential { rate })
    }

    /// Range of `k ≥ 1` carrying all Poisson(ℓ) mass above the cutoff,
    /// with `ln P(N = k)` at the left end.
    fn window(&self) -> (u64, u64) {
        let l = self.rate;
        let ln_p = |k: u64| -l + k as f64 * l.ln() - ln_gamma(k as f64 + 1.0);
        let mode = l.floor().max(1.0) as u64;
        let top = ln_p(mode);
        let floor = SERIES_CUTOFF.ln();
        let step = (l.sqrt().ceil() as u64).max(1);
        let mut lo = mode;
        while lo > 1 && ln_p(lo.saturating_sub(step).max(1)) - top > floor {
            lo = lo.saturating_sub(step).max(1);
        }
        while lo > 1 && ln_p(lo - 1) - top > floor {
            lo -= 1;
        }
        let mut hi = mode;
        while ln_p(hi + step) - top > floor {
            hi += step;
        }
        while ln_p(hi + 1) - top > floor {
            hi += 1;
        }
        (lo, hi)
    }

    /// Σ over the window of `P(N=k) · g_k(x)` where `g_k` is advanced by
    /// `next(g_k, pmf_k) = g_{k+1}` with `pmf_k = P(Pois(x) = k)`.
    fn series(&self, x: f64, first: fn(f64, f64) -> f64, next: fn(f64, f64) -> f64) -> f64 {
        let (lo, hi) = self.window();
        let l = self.rate;
        let mut ln_pk = -l + lo as f64 * l.ln() - ln_gamma(lo as f64 + 1.0);
        let mut ln_pois = -x + lo as f64 * x.ln() - ln_gamma(lo as f64 + 1.0);
        let mut g = first(lo as f64, x);
        let mut sum = 0.0;
        for k in lo..=hi {
            sum += ln_pk.exp() * g;
            g = next(g, ln_pois.exp());
            let k1 = (k + 1) as f64;
            ln_pk += l.ln() - k1.ln();
            ln_pois += x.ln() - k1.ln();
        }
        sum
    }

    /// `P(Σ Y ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let atom = (-self.rate).exp();
        if x == 0.0 || self.rate == 0.0 {
            return atom;
        }
        // g_k = P(Pois(x) ≥ k) = P(Gamma(k) ≤ x), decreasing in k
        let body = self.series(x, gamma_lr, |g, pmf| (g - pmf).max(0.0));
        (atom + body).min(1.0)
    }

    /// `P(Σ Y > x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        if self.rate == 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return -(-self.rate).exp_m1();
        }
        // g_k = P(Pois(x) ≤ k−1) = P(Gamma(k) > x), increasing in k
        self.series(x, gamma_ur, |g, pmf| g + pmf).min(1.0)
    }

    /// Smallest `x` with `cdf(x) ≥ u`, returned as the lower end of a
    /// bisection bracket of width `1e-10 · max(1, x)`, so the result never
    /// exceeds the true quantile by more than rounding of the CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        assert!((0.0..1.0).contains(&u), "quantile level must lie in [0, 1)");
        if self.rate == 0.0 || u <= (-self.rate).exp() {
            return 0.0;
        }
        let reached = |x: f64| {
            if u > 0.5 {
                self.sf(x) <= 1.0 - u
            } else {
                self.cdf(x) >= u
            }
        };
        let mut lo = 0.0;
        let mut hi = self.rate + 10.0 * self.rate.sqrt() + 10.0;
        while !reached(hi) {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > 1e-10 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if reached(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.rate == 0.0 {
            return 0.0;
        }
        let n = Poisson::new(self.rate).expect("positive rate").sample(rng);
        if n == 0.0 {
            0.0
        } else {
            Gamma::new(n, 1.0).expect("positive shape").sample(rng)
        }
    }
}

pub fn cpexp_cdf(ell: f64, x: f64) -> Result<f64> {
    Ok(CompoundPoissonExponential::new(ell)?.cdf(x))
}

fn unit_tree(tree: &Network) -> Result<TreeShape> {
    tree.require_unit_tree()
}

fn recursive_field<R: Rng + ?Sized>(shape: &TreeShape, t: f64, rng: &mut R) -> LocalTimeField {
    let mut ell = vec![0.0; shape.parent.len()];
    ell[shape.root] = t;
    for &v in &shape.bfs_order {
        if let Some(p) = shape.parent[v] {
            ell[v] = CompoundPoissonExponential { rate: ell[p] }.sample(rng);
        }
    }
    LocalTimeField { ell, t }
}

/// Local times at `τ(t)` on a unit tree without simulating the walk:
/// `ℓ_v | ℓ_parent ~ CPE(ℓ_parent)` in BFS order.
pub fn recursive_local_time_sampler(tree: &Network, t: f64, seed: u64) -> Result<LocalTimeField> {
    let shape = unit_tree(tree)?;
    check_budget(t)?;
    Ok(recursive_field(&shape, t, &mut stream_rng(seed, TREE_STREAM, 0)))
}

pub fn recursive_local_time_runs(tree: &Network, t: f64, count: usize, seed: u64) -> Result<Vec<LocalTimeField>> {
    let shape = unit_tree(tree)?;
    check_budget(t)?;
    Ok(par_replicas(count, seed, TREE_STREAM, |_, rng| recursive_field(&shape, t, rng)))
}

fn check_budget(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("t must be finite and nonnegative"));
    }
    Ok(())
}

/// Right-hand side of the domination at one vertex,
/// `max((η + sqrt(2t)) / sqrt 2, 0)`.
pub fn domination_bound(eta: f64, t: f64) -> f64 {
    // written as η/sqrt 2 + sqrt t so the pinned root gives exactly sqrt t
    (eta / std::f64::consts::SQRT_2 + t.sqrt()).max(0.0)
}

fn coupled_fields<R: Rng + ?Sized>(shape: &TreeShape, t: f64, rng: &mut R) -> (LocalTimeField, Vec<f64>) {
    let n = shape.parent.len();
    let mut ell = vec![0.0; n];
    let mut eta = vec![0.0; n];
    ell[shape.root] = t;
    for &v in &shape.bfs_order {
        let Some(p) = shape.parent[v] else { continue };
        // open interval keeps the Gaussian quantile finite
        let u = loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                break u;
            }
        };
        eta[v] = eta[p] + normal_quantile(u);
        ell[v] = if ell[p] == 0.0 {
            0.0
        } else {
            CompoundPoissonExponential { rate: ell[p] }.quantile(u)
        };
    }
    (LocalTimeField { ell, t }, eta)
}

/// Joint sample of local times and a GFF on a unit tree through a shared
/// uniform per edge; `sqrt(ℓ_v) ≤ max((η_v + sqrt(2t))/sqrt 2, 0)` holds at
/// every vertex.
pub fn coupled_sampler(tree: &Network, t: f64, seed: u64) -> Result<(LocalTimeField, GffSample)> {
    let shape = unit_tree(tree)?;
    check_budget(t)?;
    let (field, values) = coupled_fields(&shape, t, &mut stream_rng(seed, TREE_STREAM, 0));
    Ok((field, GffSample { values, seed }))
}

pub fn coupled_runs(tree: &Network, t: f64, count: usize, seed: u64) -> Result<Vec<(LocalTimeField, Vec<f64>)>> {
    let shape = unit_tree(tree)?;
    check_budget(t)?;
    Ok(par_replicas(count, seed, TREE_STREAM, |_, rng| coupled_fields(&shape, t, rng)))
}

/// Vertices where the domination fails in a coupled sample.
pub fn domination_violations(field: &LocalTimeField, eta: &[f64]) -> Vec<usize> {
    (0..eta.len())
        .filter(|&v| field.ell[v].sqrt() > domination_bound(eta[v], field.t))
        .collect()
}

/// Maximal hitting time of a unit tree in `O(n²)`: crossing the edge from
/// `x` to its neighbour `y` takes `2 s − 1` in expectation, `s` the number
/// of vertices on `x`'s side.
pub fn tree_max_hitting_time(tree: &Network) -> Result<f64> {
    let shape = unit_tree(tree)?;
    let n = tree.vertex_count();
    let mut size = vec![1usize; n];
    for &v in shape.bfs_order.iter().rev() {
        if let Some(p) = shape.parent[v] {
            size[p] += size[v];
        }
    }
    // side of x when moving x → y
    let side = |x: usize, y: usize| {
        if shape.parent[x] == Some(y) {
            size[x]
        } else {
            n - size[y]
        }
    };
    let mut best = 0.0f64;
    let mut h = vec![0.0; n];
    let mut stack = Vec::with_capacity(n);
    for target in 0..n {
        h[target] = 0.0;
        stack.clear();
        stack.push((target, usize::MAX));
        while let Some((y, from)) = stack.pop() {
            for (x, _) in tree.neighbors(y) {
                if x != from {
                    h[x] = h[y] + (2 * side(x, y) - 1) as f64;
                    best = best.max(h[x]);
                    stack.push((x, y));
                }
            }
        }
    }
    Ok(best)
}

/// Exact `E τ_cov` of the star with `leaves` leaves started at the centre,
/// `2 n H_n − 1`.
pub fn star_cover_time(leaves: usize) -> f64 {
    let h: f64 = (1..=leaves).map(|k| 1.0 / k as f64).sum();
    2.0 * leaves as f64 * h - 1.0
}

#[derive(Debug, Clone, Serialize)]
pub struct TailPoint {
    pub lambda: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeConcentrationReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub diameter: usize,
    pub mean_sup: f64,
    pub mean_sup_stderr: f64,
    pub runs: usize,
    pub mean_cover_time: f64,
    pub cover_time_stderr: f64,
    /// `mean τ_cov / (|E| (E sup η)²)`.
    pub ratio: f64,
    /// `P(|τ_cov − |E| S²| ≥ λ |E| sqrt(R) S)` with `S` the estimated mean sup.
    pub tails: Vec<TailPoint>,
    /// Least-squares slope of `ln P` against `λ` over the nonzero tails.
    pub log_tail_slope: Option<f64>,
    pub max_hitting_time: f64,
    /// `P(|τ_cov − mean| ≥ λ sqrt(t_cov t_hit))` with `t_cov` the sample mean.
    pub normalized_tails: Vec<TailPoint>,
}

pub const TAIL_LAMBDAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// Cover-time concentration on a unit tree, walks started at the root.
pub fn tree_concentration_experiment(tree: &Network, runs: usize, gff_samples: usize, seed: u64) -> Result<TreeConcentrationReport> {
    let shape = unit_tree(tree)?;
    if runs < 2 {
        return Err(Error::invalid("at least two cover runs are needed"));
    }
    let sampler = GffSampler::tree(tree)?;
    let sup = estimate_sup_with(&sampler, gff_samples, sub_seed(seed, "sup"))?;
    let covers: Vec<f64> = cover_time_runs(tree, tree.root(), runs, sub_seed(seed, "cover"))?
        .into_iter()
        .map(|c| c.0)
        .collect();
    let w: Welford = covers.iter().copied().collect();
    let e = tree.edge_count() as f64;
    let s = sup.mean_sup;
    let r = shape.diameter();
    let tail = |center: f64, scale: f64| -> Vec<TailPoint> {
        TAIL_LAMBDAS
            .iter()
            .map(|&lambda| TailPoint {
                lambda,
                probability: covers.iter().filter(|&&c| (c - center).abs() >= lambda * scale).count() as f64
                    / runs as f64,
            })
            .collect()
    };
    let tails = tail(e * s * s, e * (r as f64).sqrt() * s);
    let (xs, ys): (Vec<f64>, Vec<f64>) = tails
        .iter()
        .filter(|p| p.probability > 0.0)
        .map(|p| (p.lambda, p.probability.ln()))
        .unzip();
    let t_hit = tree_max_hitting_time(tree)?;
    let normalized_tails = tail(w.mean(), (w.mean() * t_hit).sqrt());
    Ok(TreeConcentrationReport {
        vertex_count: tree.vertex_count(),
        edge_count: tree.edge_count(),
        diameter: r,
        mean_sup: s,
        mean_sup_stderr: sup.stderr,
        runs,
        mean_cover_time: w.mean(),
        cover_time_stderr: w.stderr(),
        ratio: w.mean() / (e * s * s),
        tails,
        log_tail_slope: ols_slope(&xs, &ys),
        max_hitting_time: t_hit,
        normalized_tails,
    })
}
