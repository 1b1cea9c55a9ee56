//! Monte Carlo checks of the isomorphism identities between local times and
//! the Gaussian free field.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gff::GffSampler;
use crate::network::Network;
use crate::rng::{par_replicas, sub_seed};
use crate::spectral::{gff_covariance, jittered_cholesky};
use crate::stats::{binomial_stderr, ks_two_sample, moments, KsResult, Welford};
use crate::tree::{domination_bound, CompoundPoissonExponential};
use crate::walk::{inverse_local_time_runs, Backend};

const ISO_STREAM: u64 = 0x150;

/// Pass/fail thresholds shared by every check in this module.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Thresholds {
    /// Family-wise KS level, split over the tests by Bonferroni.
    pub ks_level: f64,
    pub moment_sigmas: f64,
    pub local_time_sigmas: f64,
    pub laplace_sigmas: f64,
    pub binomial_sigmas: f64,
}

pub const THRESHOLDS: Thresholds = Thresholds {
    ks_level: 1e-3,
    moment_sigmas: 5.0,
    local_time_sigmas: 4.0,
    laplace_sigmas: 4.0,
    binomial_sigmas: 4.0,
};

pub const LAPLACE_LAMBDAS: [f64; 2] = [0.5, 1.0];

#[derive(Debug, Clone, Serialize)]
pub struct LaplaceGap {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexComparison {
    pub vertex: usize,
    pub ks: KsResult,
    pub mean_lhs: f64,
    pub mean_rhs: f64,
    /// `t + R_eff(root, x)/2`.
    pub expected_mean: f64,
    pub mean_gap_stderr: f64,
    pub variance_lhs: f64,
    pub variance_rhs: f64,
    /// `2 t R + R²/2`.
    pub expected_variance: f64,
    pub variance_gap_stderr: f64,
    pub local_time_mean: f64,
    pub local_time_stderr: f64,
    pub laplace: Vec<LaplaceGap>,
    pub ks_pass: bool,
    pub moments_pass: bool,
    pub local_time_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceGap {
    pub u: usize,
    pub v: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Verdicts for `{L^x_{τ(t)} + η_x²/2}` against `{(η_x + sqrt(2t))²/2}`.
#[derive(Debug, Clone, Serialize)]
pub struct TwoSampleReport {
    pub t: f64,
    pub sample_count: usize,
    pub thresholds: Thresholds,
    /// Per-test KS level after Bonferroni.
    pub ks_level: f64,
    pub per_vertex: Vec<VertexComparison>,
    pub covariances: Vec<CovarianceGap>,
    pub pass: bool,
}

fn within(gap: f64, se: f64, sigmas: f64) -> bool {
    gap.abs() <= sigmas * se || gap.abs() < 1e-12
}

fn covariance_samples(a: &[f64], b: &[f64]) -> Vec<f64> {
    let ma = a.iter().sum::<f64>() / a.len() as f64;
    let mb = b.iter().sum::<f64>() / b.len() as f64;
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect()
}

/// Two-sample comparison of the generalised second Ray-Knight identity.
/// The walk (excursion backend) and the GFF on the left are independent;
/// the right uses a third independent GFF stream.
pub fn ray_knight_two_sample(net: &Network, t: f64, sample_count: usize, seed: u64) -> Result<TwoSampleReport> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t must be positive and finite"));
    }
    if sample_count < 2 {
        return Err(Error::invalid("at least two samples are needed"));
    }
    let n = net.vertex_count();
    let root = net.root();
    let sampler = GffSampler::for_network(net)?;
    let cov = gff_covariance(net)?.cov;
    let walks = inverse_local_time_runs(net, t, sample_count, Backend::Excursion, sub_seed(seed, "walk"))?;
    let eta_l = sampler.sample_many(sample_count, sub_seed(seed, "gff-lhs"));
    let eta_r = sampler.sample_many(sample_count, sub_seed(seed, "gff-rhs"));
    let shift = (2.0 * t).sqrt();
    // (η + sqrt(2t))²/2 expanded, so the pinned root gives exactly t on both sides
    let column = |f: &dyn Fn(usize) -> f64| (0..sample_count).map(f).collect::<Vec<f64>>();
    let lhs: Vec<Vec<f64>> = (0..n)
        .map(|x| column(&|i| walks[i].local_times[x] + 0.5 * eta_l[i][x] * eta_l[i][x]))
        .collect();
    let rhs: Vec<Vec<f64>> = (0..n)
        .map(|x| column(&|i| t + shift * eta_r[i][x] + 0.5 * eta_r[i][x] * eta_r[i][x]))
        .collect();

    let tested = n - 1;
    let ks_level = THRESHOLDS.ks_level / tested.max(1) as f64;
    let per_vertex: Vec<VertexComparison> = (0..n)
        .map(|x| {
            let r = cov[(x, x)];
            let (ml, mr) = (moments(&lhs[x]), moments(&rhs[x]));
            let lt: Vec<f64> = walks.iter().map(|w| w.local_times[x]).collect();
            let lt = moments(&lt);
            let ks = ks_two_sample(&lhs[x], &rhs[x]);
            let mean_se = ml.mean_stderr.hypot(mr.mean_stderr);
            let var_se = ml.variance_stderr.hypot(mr.variance_stderr);
            let laplace: Vec<LaplaceGap> = LAPLACE_LAMBDAS
                .iter()
                .map(|&lambda| {
                    let el: Welford = lhs[x].iter().map(|v| (-lambda * v).exp()).collect();
                    let er: Welford = rhs[x].iter().map(|v| (-lambda * v).exp()).collect();
                    let se = el.stderr().hypot(er.stderr());
                    LaplaceGap {
                        lambda,
                        lhs: el.mean(),
                        rhs: er.mean(),
                        stderr: se,
                        pass: within(el.mean() - er.mean(), se, THRESHOLDS.laplace_sigmas),
                    }
                })
                .collect();
            let moments_pass = within(ml.mean - mr.mean, mean_se, THRESHOLDS.moment_sigmas)
                && within(ml.variance - mr.variance, var_se, THRESHOLDS.moment_sigmas)
                && laplace.iter().all(|l| l.pass);
            VertexComparison {
                vertex: x,
                ks_pass: x == root || ks.p_value >= ks_level,
                ks,
                mean_lhs: ml.mean,
                mean_rhs: mr.mean,
                expected_mean: t + 0.5 * r,
                mean_gap_stderr: mean_se,
                variance_lhs: ml.variance,
                variance_rhs: mr.variance,
                expected_variance: 2.0 * t * r + 0.5 * r * r,
                variance_gap_stderr: var_se,
                local_time_mean: lt.mean,
                local_time_stderr: lt.mean_stderr,
                laplace,
                moments_pass,
                local_time_pass: within(lt.mean - t, lt.mean_stderr, THRESHOLDS.local_time_sigmas),
            }
        })
        .collect();

    let mut covariances = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if u == root || v == root {
                continue;
            }
            let (cl, cr) = (
                moments(&covariance_samples(&lhs[u], &lhs[v])),
                moments(&covariance_samples(&rhs[u], &rhs[v])),
            );
            let se = cl.mean_stderr.hypot(cr.mean_stderr);
            covariances.push(CovarianceGap {
                u,
                v,
                lhs: cl.mean,
                rhs: cr.mean,
                stderr: se,
                pass: within(cl.mean - cr.mean, se, THRESHOLDS.moment_sigmas),
            });
        }
    }
    let pass = per_vertex
        .iter()
        .all(|p| p.ks_pass && p.moments_pass && p.local_time_pass)
        && covariances.iter().all(|c| c.pass);
    Ok(TwoSampleReport {
        t,
        sample_count,
        thresholds: THRESHOLDS,
        ks_level,
        per_vertex,
        covariances,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BabyIsoRow {
    pub lambda: f64,
    /// `(1+λ)^{−1/2} exp(−λℓ/(1+λ))`.
    pub closed_form: f64,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub lhs_pass: bool,
    pub rhs_pass: bool,
    pub sides_agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BabyIsoReport {
    pub ell: f64,
    pub sample_count: usize,
    pub rows: Vec<BabyIsoRow>,
    pub pass: bool,
}

pub fn baby_iso_laplace(ell: f64, lambda: f64) -> f64 {
    (1.0 + lambda).powf(-0.5) * (-lambda * ell / (1.0 + lambda)).exp()
}

/// Laplace transforms of `Σ_{i≤N} Y_i + X²/2` and `(X + sqrt(2ℓ))²/2`
/// against the closed form.
pub fn baby_iso_check(ell: f64, lambdas: &[f64], sample_count: usize, seed: u64) -> Result<BabyIsoReport> {
    let cpe = CompoundPoissonExponential::new(ell)?;
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::invalid("lambdas must be positive"));
    }
    if sample_count < 2 {
        return Err(Error::invalid("at least two samples are needed"));
    }
    let shift = (2.0 * ell).sqrt();
    let pairs: Vec<(f64, f64)> = par_replicas(sample_count, seed, ISO_STREAM, |_, rng| {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        (cpe.sample(rng) + 0.5 * x * x, 0.5 * (y + shift).powi(2))
    });
    let rows: Vec<BabyIsoRow> = lambdas
        .iter()
        .map(|&lambda| {
            let l: Welford = pairs.iter().map(|p| (-lambda * p.0).exp()).collect();
            let r: Welford = pairs.iter().map(|p| (-lambda * p.1).exp()).collect();
            let exact = baby_iso_laplace(ell, lambda);
            let s = THRESHOLDS.laplace_sigmas;
            BabyIsoRow {
                lambda,
                closed_form: exact,
                lhs: l.mean(),
                lhs_stderr: l.stderr(),
                rhs: r.mean(),
                rhs_stderr: r.stderr(),
                lhs_pass: within(l.mean() - exact, l.stderr(), s),
                rhs_pass: within(r.mean() - exact, r.stderr(), s),
                sides_agree: within(l.mean() - r.mean(), l.stderr().hypot(r.stderr()), s),
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.lhs_pass && r.rhs_pass && r.sides_agree);
    Ok(BabyIsoReport {
        ell,
        sample_count,
        rows,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub ell: f64,
    pub sample_count: usize,
    pub grid_points: usize,
    /// Grid points where `P(sqrt ΣY ≥ x)` exceeds the Gaussian side beyond slack.
    pub grid_violations: usize,
    /// Largest `(P_lhs − P_rhs) / stderr` over the grid.
    pub worst_z: f64,
    pub coupling_samples: usize,
    /// Quantile-coupled pairs with `sqrt(ℓ') > max((X + sqrt(2ℓ))/sqrt 2, 0)`.
    pub coupling_violations: usize,
    pub pass: bool,
}

pub const DOMINATION_GRID: usize = 200;
/// The coupling check inverts the CDF per sample, so it uses at most this many.
pub const COUPLING_CHECK_CAP: usize = 100_000;

/// `sqrt(ΣY)` against `max(X + sqrt(2ℓ), 0)/sqrt 2`, in distribution on a
/// grid and pathwise under the quantile coupling.
pub fn domination_check(ell: f64, sample_count: usize, seed: u64) -> Result<DominationReport> {
    let cpe = CompoundPoissonExponential::new(ell)?;
    if sample_count < 2 {
        return Err(Error::invalid("at least two samples are needed"));
    }
    let pairs: Vec<(f64, f64)> = par_replicas(sample_count, seed, ISO_STREAM, |_, rng| {
        let x: f64 = rng.sample(StandardNormal);
        (cpe.sample(rng).sqrt(), domination_bound(x, ell))
    });
    let mut lhs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut rhs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    lhs.sort_by(f64::total_cmp);
    rhs.sort_by(f64::total_cmp);
    let top = lhs.last().copied().unwrap_or(0.0).max(rhs.last().copied().unwrap_or(0.0));
    let mut violations = 0;
    let mut worst_z = f64::NEG_INFINITY;
    for k in 0..DOMINATION_GRID {
        let x = top * k as f64 / (DOMINATION_GRID - 1) as f64;
        let pl = crate::stats::survival_sorted(&lhs, x);
        let pr = crate::stats::survival_sorted(&rhs, x);
        let se = binomial_stderr(pl, sample_count).hypot(binomial_stderr(pr, sample_count));
        let gap = pl - pr;
        if se > 0.0 {
            worst_z = worst_z.max(gap / se);
        }
        if gap > THRESHOLDS.binomial_sigmas * se && gap > 0.0 {
            violations += 1;
        }
    }
    let coupling_samples = sample_count.min(COUPLING_CHECK_CAP);
    let coupling_violations: usize = par_replicas(coupling_samples, sub_seed(seed, "coupling"), ISO_STREAM, |_, rng| {
        let u = loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                break u;
            }
        };
        let bound = domination_bound(crate::stats::normal_quantile(u), ell);
        usize::from(cpe.quantile(u).sqrt() > bound)
    })
    .into_iter()
    .sum();
    Ok(DominationReport {
        ell,
        sample_count,
        grid_points: DOMINATION_GRID,
        grid_violations: violations,
        worst_z,
        coupling_samples,
        coupling_violations,
        pass: violations == 0 && coupling_violations == 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SquareTailRow {
    pub lambda: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// `2 e^{−λ/4}`.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SquareTailReport {
    pub weight_sum: f64,
    pub sigma_squared: f64,
    pub rows: Vec<SquareTailRow>,
    pub pass: bool,
}

/// `P(Σ a_i X_i² ≥ λ A σ²) ≤ 2 e^{−λ/4}` for a centred Gaussian vector with
/// covariance `cov`, `A = Σ a_i`, `σ²` the largest variance.
pub fn gaussian_square_tail_check(
    weights: &[f64],
    cov: &DMatrix<f64>,
    lambdas: &[f64],
    sample_count: usize,
    seed: u64,
) -> Result<SquareTailReport> {
    let n = weights.len();
    if cov.nrows() != n || cov.ncols() != n {
        return Err(Error::invalid("covariance must be square with one row per weight"));
    }
    if weights.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::invalid("weights must be positive"));
    }
    if lambdas.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::invalid("lambdas must be nonnegative"));
    }
    let live: Vec<usize> = (0..n).filter(|&i| cov[(i, i)] > 0.0).collect();
    let sub = DMatrix::from_fn(live.len(), live.len(), |i, j| cov[(live[i], live[j])]);
    let (factor, _) = jittered_cholesky(&sub)?;
    let sigma2 = (0..n).map(|i| cov[(i, i)]).fold(0.0, f64::max);
    let a_sum: f64 = weights.iter().sum();
    let m = live.len();
    let values: Vec<f64> = par_replicas(sample_count, seed, ISO_STREAM, |_, rng| {
        let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        (0..m)
            .map(|i| {
                let x: f64 = (0..=i).map(|j| factor[(i, j)] * z[j]).sum();
                weights[live[i]] * x * x
            })
            .sum()
    });
    let rows: Vec<SquareTailRow> = lambdas
        .iter()
        .map(|&lambda| {
            let level = lambda * a_sum * sigma2;
            let p = values.iter().filter(|&&v| v >= level).count() as f64 / sample_count as f64;
            let se = binomial_stderr(p, sample_count);
            let bound = 2.0 * (-lambda / 4.0).exp();
            SquareTailRow {
                lambda,
                empirical: p,
                stderr: se,
                bound,
                pass: p <= bound + THRESHOLDS.binomial_sigmas * se,
            }
        })
        .collect();
    Ok(SquareTailReport {
        weight_sum: a_sum,
        sigma_squared: sigma2,
        pass: rows.iter().all(|r| r.pass),
        rows,
    })
}

/// The square-tail check with the GFF as the vector and `a_v = c_v`.
pub fn gff_square_tail_check(net: &Network, lambdas: &[f64], sample_count: usize, seed: u64) -> Result<SquareTailReport> {
    let cov = gff_covariance(net)?.cov;
    let weights: Vec<f64> = (0..net.vertex_count()).map(|v| net.total_conductance(v)).collect();
    gaussian_square_tail_check(&weights, &cov, lambdas, sample_count, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs;

    #[test]
    fn baby_iso_closed_forms() {
        assert!((baby_iso_laplace(0.0, 1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((baby_iso_laplace(1.0, 1.0) - 0.428882).abs() < 1e-6);
        let r = baby_iso_check(1.0, &[0.5, 1.0, 2.0], 100_000, 4).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(baby_iso_check(0.0, &[0.0], 10, 1).is_err());
    }

    #[test]
    fn ray_knight_single_edge() {
        let r = ray_knight_two_sample(&graphs::path(2), 1.0, 20_000, 3).unwrap();
        assert!(r.pass, "{r:#?}");
        let v = &r.per_vertex[1];
        assert!((v.expected_mean - 1.5).abs() < 1e-12);
        assert!((v.expected_variance - 2.5).abs() < 1e-12);
        // the root is deterministic on both sides
        assert_eq!(r.per_vertex[0].ks.statistic, 0.0);
    }

    #[test]
    fn ray_knight_detects_wrong_t() {
        // left side at t = 1 against a right side built for t = 2 must fail
        let net = graphs::path(2);
        let walks = inverse_local_time_runs(&net, 1.0, 20_000, Backend::Excursion, 1).unwrap();
        let sampler = GffSampler::dense(&net).unwrap();
        let a = sampler.sample_many(20_000, 2);
        let b = sampler.sample_many(20_000, 3);
        let lhs: Vec<f64> = (0..20_000).map(|i| walks[i].local_times[1] + 0.5 * a[i][1].powi(2)).collect();
        let rhs: Vec<f64> = b.iter().map(|s| 0.5 * (s[1] + 2.0).powi(2)).collect();
        assert!(ks_two_sample(&lhs, &rhs).p_value < 1e-6);
    }

    #[test]
    fn domination_holds() {
        let r = domination_check(1.0, 100_000, 7).unwrap();
        assert!(r.pass, "{r:?}");
        let r = domination_check(0.0, 1000, 7).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn square_tail_single_variable() {
        let cov = DMatrix::from_element(1, 1, 1.0);
        let r = gaussian_square_tail_check(&[1.0], &cov, &[0.0, 4.0], 100_000, 2).unwrap();
        assert_eq!(r.rows[0].empirical, 1.0);
        assert!((r.rows[1].bound - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        // chi-square(1) tail at 4
        assert!((r.rows[1].empirical - 0.0455).abs() < 4.0 * r.rows[1].stderr + 1e-3);
        assert!(r.pass);
        let g = gff_square_tail_check(&graphs::path(6), &[1.0, 2.0, 4.0, 8.0], 20_000, 3).unwrap();
        assert!(g.pass);
    }
}
