//! Monte Carlo summaries and goodness-of-fit tests.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Running mean/variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two points.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut w = Welford::default();
        for x in iter {
            w.push(x);
        }
        w
    }
}

/// Mean, standard error and the standard error of the sample variance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len();
    let w: Welford = xs.iter().copied().collect();
    let mean = w.mean();
    let var = w.variance();
    let m4 = if n == 0 {
        0.0
    } else {
        xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64
    };
    let var_se = if n < 2 {
        0.0
    } else {
        ((m4 - var * var).max(0.0) / n as f64).sqrt()
    };
    Moments {
        count: n,
        mean,
        mean_stderr: w.stderr(),
        variance: var,
        variance_stderr: var_se,
    }
}

/// Standard error of an empirical frequency `p` from `n` Bernoulli trials.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).max(0.0).sqrt()
    }
}

/// Sample median (average of the two central order statistics for even n).
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of empty sample");
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Bootstrap standard error of the median.
pub fn bootstrap_median_stderr<R: Rng + ?Sized>(xs: &[f64], resamples: usize, rng: &mut R) -> f64 {
    let n = xs.len();
    let mut buf = vec![0.0; n];
    let meds: Welford = (0..resamples)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = xs[rng.gen_range(0..n)];
            }
            median(&buf)
        })
        .collect();
    meds.std_dev()
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

pub fn normal_cdf(x: f64) -> f64 {
    standard_normal().cdf(x)
}

pub fn normal_sf(x: f64) -> f64 {
    standard_normal().sf(x)
}

pub fn normal_quantile(p: f64) -> f64 {
    standard_normal().inverse_cdf(p)
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² x²)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        // The alternating series converges slowly here; the value is 1 to
        // double precision (Q(0.2) = 1 - 6e-21).
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn ks_p_value(statistic: f64, effective_n: f64) -> f64 {
    let en = effective_n.sqrt();
    kolmogorov_sf((en + 0.12 + 0.11 / en) * statistic)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (Stephens' small-sample correction). Ties across samples are handled by
/// advancing both empirical CDFs past each distinct value before comparing,
/// which makes the test conservative for laws with atoms.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty(), "KS needs non-empty samples");
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let effective = (n as f64 * m as f64) / (n + m) as f64;
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, effective),
    }
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> KsResult {
    assert!(!data.is_empty(), "KS needs a non-empty sample");
    let mut x = data.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, n),
    }
}

/// Asymptotic critical value `c(α)/sqrt(n_eff)` of the KS statistic.
pub fn ks_critical_value(alpha: f64, effective_n: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / effective_n.sqrt()
}

/// Least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Empirical survival `P(X >= x)` from a sorted sample.
pub fn survival_sorted(sorted: &[f64], x: f64) -> f64 {
    let below = sorted.partition_point(|&v| v < x);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25];
        let w: Welford = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((w.mean() - mean).abs() < 1e-14);
        assert!((w.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_sf_reference_points() {
        // Q(1.36) ≈ 0.0494 and Q(1.63) ≈ 0.0098 are the classical 5% / 1% points.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 2e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(5.0) < 1e-20);
    }

    #[test]
    fn ks_two_sample_statistic_by_hand() {
        // ECDF gap is maximal after {1,2}: 2/3 - 0 = 2/3.
        let r = ks_two_sample(&[1.0, 2.0, 5.0], &[3.0, 4.0, 6.0]);
        assert!((r.statistic - 2.0 / 3.0).abs() < 1e-15);
        // identical samples
        let r = ks_two_sample(&[1.0, 2.0, 2.0], &[1.0, 2.0, 2.0]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ks_ties_do_not_inflate_statistic() {
        // both samples are the same atom-heavy law: 0 with probability 1/2
        let a: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 0.0 } else { i as f64 }).collect();
        let b: Vec<f64> = (0..1000).map(|i| if i % 2 == 1 { 0.0 } else { i as f64 + 1.0 }).collect();
        let r = ks_two_sample(&a, &b);
        assert!(r.statistic < 0.01, "{r:?}");
    }

    #[test]
    fn ks_one_sample_accepts_normal() {
        let mut rng = stream_rng(5, 0, 0);
        let xs: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = ks_one_sample(&xs, normal_cdf);
        assert!(r.p_value > 0.001, "{r:?}");
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.2).collect();
        assert!(ks_one_sample(&shifted, normal_cdf).p_value < 1e-6);
    }

    #[test]
    fn median_and_quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!((normal_quantile(0.975) - 1.959964).abs() < 1e-6);
        assert!((normal_cdf(1.0) - 0.841344746).abs() < 1e-9);
    }

    #[test]
    fn slope_of_a_line() {
        assert_eq!(ols_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]), Some(2.0));
    }
}
