//! The law of the embedded path given the local times.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::{arborescence_count, eulerian_multigraphs, path_count, EulerianMultigraph};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::rng::par_replicas;
use crate::walk::{Backend, Walker, WALK_STREAM};

pub const DEFAULT_TRAVERSE_CAP: usize = 10;
const MAX_PATH_VERTICES: usize = 4;
const MAX_TRAVERSE_CAP: usize = 16;

/// Which power of `ℓ_v` the weight carries at non-root vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightForm {
    /// `ℓ_v^{k_v} / (k_v − 1)!`.
    Normalized,
    /// `ℓ_v^{k_v − 1} / (k_v − 1)!`, the joint density up to the
    /// path-independent factor `e^{−č·ℓ}`. Differs from `Normalized` by the
    /// constant `Π_{v≠v0} ℓ_v`.
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathWeight {
    pub value: f64,
    pub log_value: f64,
}

fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

pub(super) fn ln_biguint(x: &BigUint) -> f64 {
    match x.to_f64() {
        Some(f) if f.is_finite() => f.ln(),
        _ => {
            let bits = x.bits();
            let shifted: BigUint = x >> (bits - 64);
            shifted.to_f64().unwrap_or(f64::MAX).ln() + (bits - 64) as f64 * std::f64::consts::LN_2
        }
    }
}

/// `Π c_uv^{k_uv} · t^{k_{v0}}/k_{v0}! · Π_{v≠v0} ℓ_v^{k_v}/(k_v − 1)!` in log
/// space, with `k_v` the arrivals at `v` (departures at the root), and
/// `t = ell[root]`.
pub fn path_weight(path: &[usize], ell: &[f64], net: &Network, form: WeightForm) -> Result<PathWeight> {
    let n = net.vertex_count();
    let root = net.root();
    if ell.len() != n {
        return Err(Error::invalid("one local time per vertex is required"));
    }
    if ell.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::invalid("local times must be positive and finite"));
    }
    if path.len() < 2 || path[0] != root || path[path.len() - 1] != root {
        return Err(Error::InvalidPath("path must start and end at the root".into()));
    }
    let mut arrivals = vec![0u64; n];
    let mut log_w = 0.0;
    for w in path.windows(2) {
        let (u, v) = (w[0], w[1]);
        if u >= n || v >= n {
            return Err(Error::VertexOutOfRange { vertex: u.max(v), vertex_count: n });
        }
        let c = net.conductance(u, v);
        if u == v || c <= 0.0 {
            return Err(Error::InvalidPath(format!("{u} → {v} is not an edge")));
        }
        log_w += c.ln();
        arrivals[v] += 1;
    }
    if let Some(v) = (0..n).find(|&v| arrivals[v] == 0) {
        return Err(Error::InvalidPath(format!("path does not visit vertex {v}")));
    }
    let k0 = arrivals[root];
    log_w += k0 as f64 * ell[root].ln() - ln_factorial(k0);
    for v in (0..n).filter(|&v| v != root) {
        let k = arrivals[v];
        let power = match form {
            WeightForm::Normalized => k,
            WeightForm::Density => k - 1,
        };
        log_w += power as f64 * ell[v].ln() - ln_factorial(k - 1);
    }
    Ok(PathWeight {
        value: log_w.exp(),
        log_value: log_w,
    })
}

/// `path` with the closed segment `path[i..=j]` (`path[i] == path[j]`) reversed.
pub fn reverse_segment(path: &[usize], i: usize, j: usize) -> Result<Vec<usize>> {
    if !(i < j && j < path.len() && path[i] == path[j]) {
        return Err(Error::InvalidPath("segment must be a closed sub-walk".into()));
    }
    let mut out = path.to_vec();
    out[i..=j].reverse();
    Ok(out)
}

/// `ln[ ar_{v0}(G) Π_{u≠v} (sqrt(ℓ_u ℓ_v) c_uv)^{j_uv} / j_uv! ]`.
pub fn class_weight(g: &EulerianMultigraph, ell: &[f64], net: &Network) -> Result<f64> {
    let ar = arborescence_count(g, net.root())?;
    let mut log_w = ln_biguint(&ar);
    for (u, v, k) in g.edges() {
        let base = (ell[u] * ell[v]).sqrt() * net.conductance(u, v);
        log_w += f64::from(k) * base.ln() - ln_factorial(u64::from(k));
    }
    Ok(log_w)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassCheck {
    pub graph: EulerianMultigraph,
    pub enumerated_paths: usize,
    pub path_count: String,
    pub log_weight_sum: f64,
    pub log_class_weight: f64,
    pub relative_error: f64,
    pub probability: f64,
}

/// Exact law `W_P / Z` over all closed covering paths with at most `cap` steps.
#[derive(Debug, Clone, Serialize)]
pub struct PathDistribution {
    pub cap: usize,
    pub ell: Vec<f64>,
    pub paths: Vec<Vec<usize>>,
    pub log_weights: Vec<f64>,
    /// Normalised over the enumerated paths.
    pub probabilities: Vec<f64>,
    pub log_z: f64,
    pub classes: Vec<ClassCheck>,
    pub max_class_error: f64,
    /// Every class has as many enumerated paths as its closed-form count.
    pub class_counts_match: bool,
}

impl PathDistribution {
    pub fn probability_of(&self, path: &[usize]) -> f64 {
        self.paths
            .iter()
            .position(|p| p == path)
            .map_or(0.0, |i| self.probabilities[i])
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn enumerate_paths(net: &Network, cap: usize) -> Vec<Vec<usize>> {
    let n = net.vertex_count();
    let root = net.root();
    let mut out = Vec::new();
    let mut path = vec![root];
    let mut visits = vec![0usize; n];
    visits[root] = 1;
    fn rec(net: &Network, cap: usize, path: &mut Vec<usize>, visits: &mut [usize], out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if path.len() > 1 && v == net.root() && visits.iter().all(|&k| k > 0) {
            out.push(path.clone());
        }
        if path.len() > cap {
            return;
        }
        for (u, _) in net.neighbors(v) {
            path.push(u);
            visits[u] += 1;
            rec(net, cap, path, visits, out);
            visits[u] -= 1;
            path.pop();
        }
    }
    rec(net, cap, &mut path, &mut visits, &mut out);
    out
}

pub fn conditioned_path_distribution(net: &Network, ell: &[f64], cap: usize) -> Result<PathDistribution> {
    let n = net.vertex_count();
    if n > MAX_PATH_VERTICES {
        return Err(Error::CapExceeded {
            what: "vertices for path enumeration",
            actual: n,
            cap: MAX_PATH_VERTICES,
        });
    }
    if cap > MAX_TRAVERSE_CAP {
        return Err(Error::CapExceeded {
            what: "traverse cap",
            actual: cap,
            cap: MAX_TRAVERSE_CAP,
        });
    }
    let paths = enumerate_paths(net, cap);
    if paths.is_empty() {
        return Err(Error::invalid("no covering path fits under the traverse cap"));
    }
    let log_weights = paths
        .iter()
        .map(|p| path_weight(p, ell, net, WeightForm::Normalized).map(|w| w.log_value))
        .collect::<Result<Vec<f64>>>()?;
    let log_z = log_sum_exp(&log_weights);
    let probabilities: Vec<f64> = log_weights.iter().map(|w| (w - log_z).exp()).collect();

    let mut by_class: BTreeMap<EulerianMultigraph, Vec<usize>> = BTreeMap::new();
    for (i, p) in paths.iter().enumerate() {
        by_class.entry(EulerianMultigraph::from_path(n, p)?).or_default().push(i);
    }
    let mut classes = Vec::with_capacity(by_class.len());
    let mut counts_match = true;
    for (g, members) in by_class {
        let lw: Vec<f64> = members.iter().map(|&i| log_weights[i]).collect();
        let sum = log_sum_exp(&lw);
        let formula = class_weight(&g, ell, net)?;
        let count = path_count(&g, net.root())?;
        counts_match &= count == BigUint::from(members.len());
        classes.push(ClassCheck {
            enumerated_paths: members.len(),
            path_count: count.to_string(),
            log_weight_sum: sum,
            log_class_weight: formula,
            relative_error: (sum - formula).exp_m1().abs(),
            probability: members.iter().map(|&i| probabilities[i]).sum(),
            graph: g,
        });
    }
    let max_class_error = classes.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    Ok(PathDistribution {
        cap,
        ell: ell.to_vec(),
        paths,
        log_weights,
        probabilities,
        log_z,
        classes,
        max_class_error,
        class_counts_match: counts_match,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRatio {
    pub k: usize,
    /// `ν(k+1) / ν(k−1)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraverseDecayReport {
    pub u: usize,
    pub v: usize,
    /// `ℓ_u ℓ_v c_uv²`.
    pub condition_product: f64,
    pub condition_holds: bool,
    /// `ν(k) = P(k_uv + k_vu = k)` over the enumeration.
    pub nu: Vec<(usize, f64)>,
    pub ratios: Vec<DecayRatio>,
    /// Law of `|k_uv − k_vu|`.
    pub imbalance: Vec<(usize, f64)>,
    /// The proven ratio bound starts at `k = 184`; far beyond enumeration.
    pub asymptotic_regime_reached: bool,
}

pub const DECAY_ONSET: usize = 184;

pub fn traverse_decay_report(net: &Network, ell: &[f64], cap: usize, u: usize, v: usize) -> Result<TraverseDecayReport> {
    net.check_vertex(u)?;
    net.check_vertex(v)?;
    let dist = conditioned_path_distribution(net, ell, cap)?;
    let mut nu: BTreeMap<usize, f64> = BTreeMap::new();
    let mut imbalance: BTreeMap<usize, f64> = BTreeMap::new();
    for (p, &prob) in dist.paths.iter().zip(&dist.probabilities) {
        let (mut a, mut b) = (0usize, 0usize);
        for w in p.windows(2) {
            if (w[0], w[1]) == (u, v) {
                a += 1;
            } else if (w[0], w[1]) == (v, u) {
                b += 1;
            }
        }
        *nu.entry(a + b).or_insert(0.0) += prob;
        *imbalance.entry(a.abs_diff(b)).or_insert(0.0) += prob;
    }
    let nu_at = |k: usize| nu.get(&k).copied().unwrap_or(0.0);
    let top = nu.keys().copied().max().unwrap_or(0);
    let ratios = (1..top)
        .filter(|&k| nu_at(k - 1) > 0.0)
        .map(|k| DecayRatio {
            k,
            ratio: nu_at(k + 1) / nu_at(k - 1),
        })
        .collect();
    let c = net.conductance(u, v);
    let product = ell[u] * ell[v] * c * c;
    Ok(TraverseDecayReport {
        u,
        v,
        condition_product: product,
        condition_holds: product <= 1.0 / 16.0,
        nu: nu.into_iter().collect(),
        ratios,
        imbalance: imbalance.into_iter().collect(),
        asymptotic_regime_reached: cap >= DECAY_ONSET,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkLawRow {
    pub path: Vec<usize>,
    pub predicted: f64,
    pub observed: f64,
    pub stderr: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkLawReport {
    pub runs: usize,
    /// Runs whose local times all fell within the bin around the target.
    pub kept: usize,
    pub bin_width: f64,
    pub rows: Vec<WalkLawRow>,
    /// Kept runs whose path was longer than the enumeration cap.
    pub beyond_cap: usize,
    pub max_abs_z: f64,
    pub pass: bool,
}

/// Paths of simulated walks to `τ(t)` whose local times land within
/// `±bin_width` (relative) of `ell` on every non-root vertex, against
/// `W_P / Z` at `ell`.
pub fn walk_law_consistency(
    net: &Network,
    ell: &[f64],
    bin_width: f64,
    runs: usize,
    cap: usize,
    seed: u64,
) -> Result<WalkLawReport> {
    let dist = conditioned_path_distribution(net, ell, cap)?;
    let root = net.root();
    let t = ell[root];
    let walker = Walker::new(net);
    let kept: Vec<Vec<usize>> = par_replicas(runs, seed, WALK_STREAM, |_, rng| {
        let tr = walker
            .inverse_local_time(t, Backend::Excursion, rng)
            .expect("positive t");
        let inside = (0..ell.len())
            .filter(|&v| v != root)
            .all(|v| (tr.local_times[v] - ell[v]).abs() <= bin_width * ell[v]);
        inside.then_some(tr.path)
    })
    .into_iter()
    .flatten()
    .collect();
    let m = kept.len();
    let mut tally: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for p in &kept {
        *tally.entry(p.clone()).or_insert(0) += 1;
    }
    let mut rows = Vec::new();
    for (p, &prob) in dist.paths.iter().zip(&dist.probabilities) {
        let observed = tally.get(p).copied().unwrap_or(0) as f64 / m.max(1) as f64;
        let se = (prob * (1.0 - prob) / m.max(1) as f64).sqrt();
        rows.push(WalkLawRow {
            path: p.clone(),
            predicted: prob,
            observed,
            stderr: se,
            z: if se > 0.0 { (observed - prob) / se } else { 0.0 },
        });
    }
    let beyond_cap = kept.iter().filter(|p| p.len() > cap + 1).count();
    let max_abs_z = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    // anything beyond the cap must be rare enough to be consistent with the
    // truncated mass being negligible
    let beyond_ok = (beyond_cap as f64) <= 5.0 * (m as f64).sqrt().max(1.0);
    Ok(WalkLawReport {
        runs,
        kept: m,
        bin_width,
        rows,
        beyond_cap,
        max_abs_z,
        pass: m >= 100 && max_abs_z <= 5.0 && beyond_ok,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ArborescenceRatioCheck {
    pub max_vertices: usize,
    pub cap: u32,
    pub pairs_checked: usize,
    pub violations: usize,
}

/// For nested Eulerian `G' ≤ G` with equal support:
/// `ar(G') / ar(G) ≥ Π j'/j`, checked in integers.
pub fn arborescence_ratio_check(max_vertices: usize, cap: u32) -> Result<ArborescenceRatioCheck> {
    let mut pairs = 0;
    let mut violations = 0;
    for n in 2..=max_vertices {
        for g in eulerian_multigraphs(n, cap) {
            let edges = g.edges();
            let ar = arborescence_count(&g, 0)?;
            let prod_j: BigUint = edges.iter().map(|e| BigUint::from(e.2)).product();
            // every j' with 1 ≤ j'_e ≤ j_e on the support
            let mut jp: Vec<u32> = vec![1; edges.len()];
            loop {
                let mut m = vec![vec![0u32; n]; n];
                for (e, &k) in edges.iter().zip(&jp) {
                    m[e.0][e.1] = k;
                }
                let h = EulerianMultigraph::new(m)?;
                if h.is_balanced() {
                    pairs += 1;
                    let ar_h = arborescence_count(&h, 0)?;
                    let prod_jp: BigUint = jp.iter().map(|&k| BigUint::from(k)).product();
                    if ar_h * &prod_j < &ar * prod_jp {
                        violations += 1;
                    }
                }
                let mut i = 0;
                while i < jp.len() && jp[i] == edges[i].2 {
                    jp[i] = 1;
                    i += 1;
                }
                if i == jp.len() {
                    break;
                }
                jp[i] += 1;
            }
        }
    }
    Ok(ArborescenceRatioCheck {
        max_vertices,
        cap,
        pairs_checked: pairs,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn single_round_trip_weight() {
        let net = graphs::path(2);
        let w = path_weight(&[0, 1, 0], &[1.0, 1.0], &net, WeightForm::Normalized).unwrap();
        assert!((w.value - 1.0).abs() < 1e-15);
        assert!(path_weight(&[0, 1], &[1.0, 1.0], &net, WeightForm::Normalized).is_err());
        assert!(path_weight(&[0, 1, 0], &[1.0, 0.0], &net, WeightForm::Normalized).is_err());
    }

    #[test]
    fn scaling_conductances() {
        let a = Network::from_edges(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 0.5)], 0).unwrap();
        let alpha: f64 = 3.0;
        let b = Network::from_edges(3, [(0, 1, alpha), (1, 2, 2.0 * alpha), (0, 2, 0.5 * alpha)], 0).unwrap();
        let p = [0, 1, 2, 1, 0, 2, 0];
        let ell = [0.7, 1.3, 0.4];
        let wa = path_weight(&p, &ell, &a, WeightForm::Normalized).unwrap();
        let wb = path_weight(&p, &ell, &b, WeightForm::Normalized).unwrap();
        assert!((wb.log_value - wa.log_value - 6.0 * alpha.ln()).abs() < 1e-12);
    }

    #[test]
    fn forms_differ_by_a_constant() {
        let net = graphs::complete(3);
        let ell: [f64; 3] = [0.5, 0.8, 1.7];
        let target = ell[1].ln() + ell[2].ln();
        for p in [vec![0, 1, 2, 0], vec![0, 2, 1, 0, 1, 0], vec![0, 1, 2, 1, 2, 0]] {
            let a = path_weight(&p, &ell, &net, WeightForm::Normalized).unwrap();
            let b = path_weight(&p, &ell, &net, WeightForm::Density).unwrap();
            assert!((a.log_value - b.log_value - target).abs() < 1e-12);
        }
    }

    #[test]
    fn cycle_reversal_on_random_paths() {
        let net = graphs::complete(4);
        let ell = [0.9, 0.3, 1.4, 0.6];
        let mut rng = stream_rng(1, 0, 0);
        for seed in 0..200 {
            let tr = crate::walk::simulate_to_inverse_local_time(&net, 3.0, seed).unwrap();
            if tr.path.len() < 4 || (0..4).any(|v| !tr.path.contains(&v)) {
                continue;
            }
            let len = tr.path.len();
            let candidates: Vec<(usize, usize)> = (1..len - 1)
                .flat_map(|i| (i + 1..len - 1).map(move |j| (i, j)))
                .filter(|&(i, j)| tr.path[i] == tr.path[j])
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let (i, j) = candidates[rng.gen_range(0..candidates.len())];
            let rev = reverse_segment(&tr.path, i, j).unwrap();
            let a = path_weight(&tr.path, &ell, &net, WeightForm::Normalized).unwrap();
            let b = path_weight(&rev, &ell, &net, WeightForm::Normalized).unwrap();
            assert!((a.log_value - b.log_value).abs() < 1e-9);
        }
    }

    #[test]
    fn two_vertex_distribution_is_explicit() {
        let net = graphs::path(2);
        let ell = [1.0, 1.0];
        let d = conditioned_path_distribution(&net, &ell, 10).unwrap();
        assert_eq!(d.paths.len(), 5);
        let total: f64 = d.probabilities.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // W(m round trips) = 1/(m!(m−1)!)
        let w = |m: u32| 1.0 / ((1..=m).product::<u32>() as f64 * (1..m).product::<u32>() as f64);
        let z: f64 = (1..=5).map(w).sum();
        assert!((d.probability_of(&[0, 1, 0, 1, 0]) - w(2) / z).abs() < 1e-12);
        assert!(d.max_class_error < 1e-9);
        assert!(d.class_counts_match);
    }

    #[test]
    fn class_aggregation_on_triangle() {
        let net = Network::from_edges(3, [(0, 1, 1.0), (1, 2, 0.5), (0, 2, 2.0)], 1).unwrap();
        let d = conditioned_path_distribution(&net, &[0.4, 1.1, 0.8], 8).unwrap();
        assert!(d.max_class_error < 1e-9, "{}", d.max_class_error);
        assert!(d.class_counts_match);
    }

    #[test]
    fn decay_on_two_vertices() {
        let net = graphs::path(2);
        let r = traverse_decay_report(&net, &[0.125, 0.125], 12, 0, 1).unwrap();
        assert!(r.condition_holds);
        assert!(r.ratios.iter().filter(|d| d.k >= 3).all(|d| d.ratio < 1.0));
        assert_eq!(r.imbalance, vec![(0, r.imbalance[0].1)]);
        let tri = traverse_decay_report(&graphs::complete(3), &[0.5, 0.5, 0.5], 9, 0, 1).unwrap();
        assert!(tri.imbalance.iter().any(|&(d, p)| d > 0 && p > 0.0));
    }

    #[test]
    fn claim_on_three_vertices() {
        let r = arborescence_ratio_check(3, 6).unwrap();
        assert!(r.pairs_checked > 0);
        assert_eq!(r.violations, 0);
    }
}
