//! Histograms over the discrete x_est lattice and the statistical tests the
//! ensemble reports use.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// One row of an ensemble's prediction table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub simulated: f64,
    pub predicted: f64,
    /// Absolute tolerance on `simulated - predicted`.
    pub tolerance: f64,
    pub pass: bool,
}

impl Comparison {
    pub fn new(name: &str, simulated: f64, predicted: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            simulated,
            predicted,
            tolerance,
            pass: (simulated - predicted).abs() <= tolerance,
        }
    }
}

/// Histogram of x_est over its natural lattice: the N+1 values
/// `(2 n_b - N) / (2kN)`, spaced by `delta = 1/(kN)`. Bins are indexed by
/// `n_b` over the contiguous observed range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XestHistogram {
    pub n_photons: usize,
    pub k: f64,
    /// Lattice spacing `1/(kN)`.
    pub delta: f64,
    pub bins: Vec<HistogramBin>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramBin {
    pub n_b: usize,
    /// Lattice value of x_est for this count.
    pub center: f64,
    pub count: u64,
    /// Exact outcome probability for this count, from the binomial-weighted
    /// closed form.
    pub predicted_probability: f64,
}

impl XestHistogram {
    /// Histogram the observed `n_b` counts; `predicted` supplies the exact
    /// per-count probability. Covers the contiguous range between the
    /// smallest and largest observation.
    pub fn from_counts(
        n_photons: usize,
        k: f64,
        observed_n_b: &[usize],
        predicted: impl Fn(usize) -> f64,
    ) -> Self {
        assert!(!observed_n_b.is_empty());
        let lo = *observed_n_b.iter().min().unwrap();
        let hi = *observed_n_b.iter().max().unwrap();
        let mut counts = vec![0u64; hi - lo + 1];
        for &n_b in observed_n_b {
            counts[n_b - lo] += 1;
        }
        let delta = 1.0 / (k * n_photons as f64);
        let bins = counts
            .into_iter()
            .enumerate()
            .map(|(offset, count)| {
                let n_b = lo + offset;
                HistogramBin {
                    n_b,
                    center: (2.0 * n_b as f64 - n_photons as f64) / (2.0 * k * n_photons as f64),
                    count,
                    predicted_probability: predicted(n_b),
                }
            })
            .collect();
        Self {
            n_photons,
            k,
            delta,
            bins,
        }
    }

    pub fn total_count(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }
}

/// Result of a Pearson goodness-of-fit test.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

impl ChiSquareResult {
    pub fn passes_at(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Pearson chi-square of observed counts against expected counts, grouping
/// adjacent cells until every group's expectation reaches `min_expected`
/// (the usual >= 5 rule). Cells outside the listed range must carry
/// negligible expected mass; any residual is folded into the edge groups.
pub fn chi_square_test(
    observed: &[u64],
    expected: &[f64],
    min_expected: f64,
) -> Option<ChiSquareResult> {
    assert_eq!(observed.len(), expected.len());
    let mut groups: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut acc_obs = 0.0;
    let mut acc_exp = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_obs += o as f64;
        acc_exp += e;
        if acc_exp >= min_expected {
            groups.push((acc_obs, acc_exp));
            acc_obs = 0.0;
            acc_exp = 0.0;
        }
    }
    if acc_exp > 0.0 || acc_obs > 0.0 {
        // fold the leftover tail into the last group
        if let Some(last) = groups.last_mut() {
            last.0 += acc_obs;
            last.1 += acc_exp;
        } else {
            return None;
        }
    }
    if groups.len() < 2 {
        return None;
    }

    let statistic: f64 = groups
        .iter()
        .map(|(o, e)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let dof = groups.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    Some(ChiSquareResult {
        statistic,
        degrees_of_freedom: dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}

/// Sample mean.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    assert!(values.len() >= 2);
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// Standard error of the mean.
pub fn standard_error(values: &[f64]) -> f64 {
    (sample_variance(values) / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_applies_absolute_tolerance() {
        assert!(Comparison::new("x", 1.0, 1.05, 0.1).pass);
        assert!(!Comparison::new("x", 1.0, 1.2, 0.1).pass);
    }

    #[test]
    fn histogram_counts_sum_to_sample_size() {
        let samples = vec![48, 50, 50, 51, 52, 50, 49];
        let hist = XestHistogram::from_counts(100, 1.0, &samples, |_| 0.0);
        assert_eq!(hist.total_count(), samples.len() as u64);
        assert_eq!(hist.bins.first().unwrap().n_b, 48);
        assert_eq!(hist.bins.last().unwrap().n_b, 52);
        // center of n_b = 50 at N = 100 is exactly 0
        let center_bin = hist.bins.iter().find(|b| b.n_b == 50).unwrap();
        assert_eq!(center_bin.center, 0.0);
        assert_eq!(hist.delta, 0.01);
    }

    #[test]
    fn chi_square_matches_reference_value() {
        // Uniform die example: X^2 = 2.41791..., p = 0.49031 at 3 dof.
        let observed = [28u64, 31, 40, 35];
        let expected = [33.5f64, 33.5, 33.5, 33.5];
        let result = chi_square_test(&observed, &expected, 5.0).unwrap();
        assert_eq!(result.degrees_of_freedom, 3);
        assert!((result.statistic - 2.417_910_447_761_194).abs() < 1e-12);
        assert!((result.p_value - 0.490_309_306_965_388_3).abs() < 1e-10);
        assert!(result.passes_at(0.01));
    }

    #[test]
    fn chi_square_groups_sparse_tails() {
        // expectations below the threshold merge with neighbors
        let observed = [1u64, 4, 30, 60, 30, 4, 0];
        let expected = [0.5f64, 4.0, 30.0, 60.0, 30.0, 4.0, 0.5];
        let result = chi_square_test(&observed, &expected, 5.0).unwrap();
        assert!(result.degrees_of_freedom < observed.len() - 1);
        assert!(result.p_value > 0.01);
    }

    #[test]
    fn moment_helpers() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&v), 2.5);
        assert!((sample_variance(&v) - 5.0 / 3.0).abs() < 1e-15);
        assert!((standard_error(&v) - (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
    }
}
