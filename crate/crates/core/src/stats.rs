//! Empirical distributions, summary statistics and goodness-of-fit.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng;

/// Pairwise summation in a fixed order, independent of how the slice was produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean, standard deviation and standard error of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

pub fn summarize(xs: &[f64]) -> Result<Summary> {
    if xs.is_empty() {
        return Err(Error::Empty);
    }
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = if xs.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
    let sd = libm::sqrt(var);
    Ok(Summary { count: xs.len(), mean, sd, se: sd / libm::sqrt(n) })
}

/// Sorted samples with optional weights, normalized to total mass one.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty);
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(crate::error::invalid("NaN sample"));
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let cumulative = (1..=samples.len()).map(|i| i as f64 / n).collect();
        Ok(Self { values: samples, cumulative })
    }

    pub fn weighted(samples: &[f64], weights: &[f64]) -> Result<Self> {
        if samples.len() != weights.len() {
            return Err(Error::LengthMismatch(samples.len(), weights.len()));
        }
        if samples.is_empty() {
            return Err(Error::Empty);
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(crate::error::invalid("weights must be positive and finite"));
        }
        let mut idx: Vec<usize> = (0..samples.len()).collect();
        idx.sort_by(|&a, &b| samples[a].total_cmp(&samples[b]).then(a.cmp(&b)));
        let total = pairwise_sum(weights);
        let mut acc = 0.0;
        let mut values = Vec::with_capacity(idx.len());
        let mut cumulative = Vec::with_capacity(idx.len());
        for i in idx {
            acc += weights[i];
            values.push(samples[i]);
            cumulative.push(acc / total);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(Self { values, cumulative })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted sample values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mass at or below each sorted value.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Empirical CDF, right-continuous.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|v| *v <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    pub fn mean(&self) -> f64 {
        let mut prev = 0.0;
        let terms: Vec<f64> = self
            .values
            .iter()
            .zip(&self.cumulative)
            .map(|(v, c)| {
                let w = c - prev;
                prev = *c;
                v * w
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// Smallest sample value whose cumulative mass reaches `q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let k = self.cumulative.partition_point(|c| *c < q);
        self.values[k.min(self.values.len() - 1)]
    }

    /// Sup-distance to a continuous reference CDF.
    pub fn ks_against<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let mut d: f64 = 0.0;
        let mut prev = 0.0;
        let mut i = 0;
        while i < self.values.len() {
            let v = self.values[i];
            let mut j = i;
            while j + 1 < self.values.len() && self.values[j + 1] == v {
                j += 1;
            }
            let f = cdf(v);
            d = d.max((f - prev).abs()).max((self.cumulative[j] - f).abs());
            prev = self.cumulative[j];
            i = j + 1;
        }
        d
    }

    /// Two-sample sup-distance between empirical CDFs.
    pub fn ks_between(&self, other: &Self) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (mut fa, mut fb) = (0.0, 0.0);
        let mut d: f64 = 0.0;
        while i < self.values.len() || j < other.values.len() {
            let x = match (self.values.get(i), other.values.get(j)) {
                (Some(a), Some(b)) => a.min(*b),
                (Some(a), None) => *a,
                (None, Some(b)) => *b,
                (None, None) => break,
            };
            while i < self.values.len() && self.values[i] <= x {
                fa = self.cumulative[i];
                i += 1;
            }
            while j < other.values.len() && other.values[j] <= x {
                fb = other.cumulative[j];
                j += 1;
            }
            d = d.max((fa - fb).abs());
        }
        d
    }
}

/// One-sample Kolmogorov–Smirnov statistic of raw samples against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    Ok(EmpiricalDistribution::new(samples.to_vec())?.ks_against(cdf))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let da = EmpiricalDistribution::new(a.to_vec())?;
    let db = EmpiricalDistribution::new(b.to_vec())?;
    Ok(da.ks_between(&db))
}

/// Upper `q`-quantile of the one-sample KS statistic under the null, by simulation.
pub fn ks_null_quantile(sample_size: usize, replicates: usize, q: f64, seed: u64) -> f64 {
    let mut stats: Vec<f64> = (0..replicates)
        .map(|r| {
            let mut g = rng::substream(seed, r as u64);
            let xs: Vec<f64> = (0..sample_size).map(|_| rng::uniform(&mut g)).collect();
            EmpiricalDistribution::new(xs).map(|d| d.ks_against(|x| x.clamp(0.0, 1.0))).unwrap_or(1.0)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let k = ((q * replicates as f64).ceil() as usize).clamp(1, replicates) - 1;
    stats[k]
}

/// Ordinary least-squares line with residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::TooFewPoints(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let sxy: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let sxx: Vec<f64> = xs.iter().map(|x| (x - mx) * (x - mx)).collect();
    let den = pairwise_sum(&sxx);
    if den == 0.0 {
        return Err(crate::error::invalid("degenerate abscissae"));
    }
    let slope = pairwise_sum(&sxy) / den;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    Ok(LinearFit { slope, intercept, residuals })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Exp(1) CDF.
pub fn exp_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -libm::expm1(-x)
    }
}

/// Plug-in Shannon entropy (nats) of a count vector.
pub fn entropy_of_counts(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let mut terms: Vec<f64> = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * libm::log(p)
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn ks_identical_is_zero() {
        let a = vec![0.1, 0.5, 0.3, 0.9];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn ks_uniform_vs_uniform() {
        let mut g = rng::substream(11, 0);
        let a: Vec<f64> = (0..10_000).map(|_| rng::uniform(&mut g)).collect();
        let b: Vec<f64> = (0..10_000).map(|_| rng::uniform(&mut g)).collect();
        assert!(ks_two_sample(&a, &b).unwrap() < 0.03);
        assert!(ks_statistic(&a, |x| x.clamp(0.0, 1.0)).unwrap() < 0.03);
    }

    #[test]
    fn ks_uniform_vs_stretched() {
        let mut g = rng::substream(12, 0);
        let a: Vec<f64> = (0..10_000).map(|_| rng::uniform(&mut g)).collect();
        let b: Vec<f64> = (0..10_000).map(|_| 2.0 * rng::uniform(&mut g)).collect();
        assert!(ks_two_sample(&a, &b).unwrap() >= 0.45);
        assert!(ks_statistic(&a, |x| (x / 2.0).clamp(0.0, 1.0)).unwrap() >= 0.49);
    }

    #[test]
    fn ks_empty_errors() {
        assert_eq!(ks_statistic(&[], |x| x), Err(Error::Empty));
    }

    #[test]
    fn ks_null_quantile_matches_asymptotics() {
        // Asymptotic 95% point is 1.358/sqrt(n).
        let q = ks_null_quantile(400, 400, 0.95, 3);
        let asym = 1.358 / 20.0;
        assert!((q - asym).abs() < 0.15 * asym, "{q} vs {asym}");
    }

    #[test]
    fn weighted_cdf_and_mean() {
        let d = EmpiricalDistribution::weighted(&[2.0, 1.0, 3.0], &[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(d.values(), &[1.0, 2.0, 3.0]);
        assert!((d.cdf(1.5) - 0.25).abs() < 1e-15);
        assert!((d.cdf(3.0) - 1.0).abs() < 1e-15);
        assert!((d.mean() - 2.25).abs() < 1e-15);
        assert_eq!(d.quantile(0.5), 2.0);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_uniform() {
        assert!((entropy_of_counts(&[5, 5, 5, 5]) - libm::log(4.0)).abs() < 1e-12);
        assert_eq!(entropy_of_counts(&[7]), 0.0);
    }
}
