//! Estimators and goodness-of-fit tests used to compare simulations with
//! closed forms.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};
use crate::params::DensityCurve;

/// Sample mean with its standard error and the number of independent samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl Estimate {
    /// `|mean − target| ≤ k·SE`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }

    /// Signed distance to `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.std_error
    }
}

pub fn mean_estimate(xs: &[f64]) -> Result<Estimate> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::EmptySample);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(Estimate { mean, std_error: (var / n as f64).sqrt(), count: n })
}

/// Pooled ratio `Σ sums / Σ counts` over independent runs, with the
/// delta-method standard error. This is the per-unit average when each run
/// contributes a random number of units.
pub fn ratio_estimate(sums: &[f64], counts: &[f64]) -> Result<Estimate> {
    let n = sums.len();
    if n < 2 || counts.len() != n {
        return Err(Error::EmptySample);
    }
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(Error::EmptySample);
    }
    let r = sums.iter().sum::<f64>() / total;
    let mean_count = total / n as f64;
    let resid = sums.iter().zip(counts).map(|(s, c)| (s - r * c).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(Estimate { mean: r, std_error: (resid / n as f64).sqrt() / mean_count, count: n })
}

/// One-sample Kolmogorov–Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of `samples` against the continuous CDF `cdf`, with the
/// Stephens finite-sample correction `λ = (√n + 0.12 + 0.11/√n) D`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let values: Vec<f64> = xs.iter().map(|&x| cdf(x)).collect();
    ks_test_sorted(&values)
}

/// KS test from the model CDF already evaluated at the sorted samples. Useful
/// when the CDF is cheapest to evaluate cumulatively along the sorted sample.
pub fn ks_test_sorted(cdf_at_sorted: &[f64]) -> Result<KsResult> {
    if cdf_at_sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = cdf_at_sorted.len() as f64;
    let d = cdf_at_sorted.iter().enumerate().fold(0.0f64, |d, (i, &f)| d.max(f - i as f64 / n).max((i + 1) as f64 / n - f));
    let sn = n.sqrt();
    Ok(KsResult { statistic: d, p_value: kolmogorov_q((sn + 0.12 + 0.11 / sn) * d), n: cdf_at_sorted.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² of observed bin counts against expected counts. Bins with
/// expected count below `min_expected` are merged into their right neighbour
/// (the last into its left), so the asymptotic law applies.
pub fn chi_square_test(observed: &[f64], expected: &[f64], min_expected: f64) -> Result<ChiSquareResult> {
    if observed.len() != expected.len() || observed.is_empty() {
        return invalid("observed and expected counts must be nonempty and of equal length");
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= min_expected {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    if bins.len() < 2 {
        return invalid("need at least two bins after merging");
    }
    let statistic = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let p_value = 1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(statistic);
    Ok(ChiSquareResult { statistic, dof, p_value })
}

/// Bin counts of `samples` on increasing `edges`; samples outside are ignored.
pub fn histogram_counts(samples: &[f64], edges: &[f64]) -> Result<Vec<f64>> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("bin edges must be strictly increasing with at least two entries");
    }
    let mut counts = vec![0.0; edges.len() - 1];
    for &x in samples {
        if x < edges[0] || x > edges[edges.len() - 1] {
            continue;
        }
        let i = edges.partition_point(|&e| e <= x).saturating_sub(1).min(counts.len() - 1);
        counts[i] += 1.0;
    }
    Ok(counts)
}

fn bin_centres(edges: &[f64], log: bool) -> Vec<f64> {
    edges.windows(2).map(|w| if log { (w[0] * w[1]).sqrt() } else { 0.5 * (w[0] + w[1]) }).collect()
}

/// Histogram density `count / (N · width)` over all `samples` (including
/// those outside the edges) at geometric bin centres, with Poisson standard
/// errors. Comparable pointwise with a normalized density.
pub fn histogram_density(samples: &[f64], edges: &[f64]) -> Result<DensityCurve> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let counts = histogram_counts(samples, edges)?;
    let n = samples.len() as f64;
    let widths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let values = counts.iter().zip(&widths).map(|(c, w)| c / (n * w)).collect();
    let se = counts.iter().zip(&widths).map(|(c, w)| c.sqrt() / (n * w)).collect();
    DensityCurve::new(bin_centres(edges, edges[0] > 0.0), values)?.with_std_errors(se)
}

/// Log-binned density estimate over `edges` (positive, increasing), rescaled
/// so that its trapezoid integral over the bin centres equals one.
pub fn estimate_density(samples: &[f64], edges: &[f64]) -> Result<DensityCurve> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if edges.first().is_some_and(|&e| !(e > 0.0)) {
        return invalid("log bins need positive edges");
    }
    let raw = histogram_density(samples, edges)?;
    let total = raw.integral();
    if !(total > 0.0) {
        return invalid("no samples fall inside the bins");
    }
    let values = raw.values().iter().map(|v| v / total).collect();
    let se = raw.std_errors().expect("histogram has errors").iter().map(|v| v / total).collect();
    DensityCurve::new(raw.xs().to_vec(), values)?.with_std_errors(se)
}
