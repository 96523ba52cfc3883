use std::collections::BTreeMap;

use super::{CouplingError, DistanceEstimate, Result};
use crate::stats::sample_std;

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Exact `W_p` between the empirical measures of two samples on the line,
/// `(∫_0^1 |F_a^{-1}(u) - F_b^{-1}(u)|^p du)^{1/p}`. For equal sizes this is
/// the order-statistics pairing `(1/n Σ |a_(k) - b_(k)|^p)^{1/p}`; unequal
/// sizes integrate the two quantile step functions over their merged
/// breakpoints. The standard error is a delta-method value from the spread of
/// the paired costs.
pub fn empirical_wasserstein(a: &[f64], b: &[f64], p: f64) -> Result<DistanceEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(CouplingError::Contract("empirical_wasserstein needs nonempty samples".into()));
    }
    if !(p >= 1.0) {
        return Err(CouplingError::Contract(format!("order p must be >= 1, got {p}")));
    }
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len(), b.len());
    // Walk the merged grid {i/n} ∪ {j/m} with integer arithmetic on n·m.
    let (mut i, mut j) = (0usize, 0usize);
    let mut pos = 0usize;
    let total = n * m;
    let (mut mean, mut second) = (0.0, 0.0);
    while pos < total {
        let next = ((i + 1) * m).min((j + 1) * n);
        let w = (next - pos) as f64 / total as f64;
        let cost = (a[i] - b[j]).abs().powf(p);
        mean += w * cost;
        second += w * cost * cost;
        pos = next;
        if pos == (i + 1) * m {
            i += 1;
        }
        if pos == (j + 1) * n {
            j += 1;
        }
    }
    let value = mean.powf(1.0 / p);
    let count = n.max(m);
    let var = (second - mean * mean).max(0.0);
    let se_mean = (var / count as f64).sqrt();
    let std_err = if mean > 0.0 {
        value / (p * mean) * se_mean
    } else {
        0.0
    };
    Ok(DistanceEstimate {
        value,
        std_err,
        count,
    })
}

/// `0.01 ×` the pooled sample standard deviation.
pub fn default_bin_width(a: &[f64], b: &[f64]) -> f64 {
    let mut pooled = a.to_vec();
    pooled.extend_from_slice(b);
    0.01 * sample_std(&pooled)
}

/// Half the L¹ distance between the two histogram densities on the grid
/// `{k · bin_width}`. The standard error sums the binomial variances of the
/// bin frequencies, which overstates it for well-separated samples.
pub fn empirical_tv(a: &[f64], b: &[f64], bin_width: f64) -> Result<DistanceEstimate> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(CouplingError::Contract(format!("bin width must be positive, got {bin_width}")));
    }
    if a.is_empty() || b.is_empty() {
        return Err(CouplingError::Contract("empirical_tv needs nonempty samples".into()));
    }
    let mut bins: BTreeMap<i64, [u64; 2]> = BTreeMap::new();
    for (side, samples) in [a, b].into_iter().enumerate() {
        for &x in samples {
            bins.entry((x / bin_width).floor() as i64).or_default()[side] += 1;
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut l1 = 0.0;
    let mut var = 0.0;
    for [ca, cb] in bins.values() {
        let (pa, pb) = (*ca as f64 / na, *cb as f64 / nb);
        l1 += (pa - pb).abs();
        var += pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb;
    }
    Ok(DistanceEstimate {
        value: 0.5 * l1,
        std_err: 0.5 * var.sqrt(),
        count: a.len().min(b.len()),
    })
}
