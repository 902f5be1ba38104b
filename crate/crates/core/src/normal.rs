//! Standard normal distribution helpers and a one-sample Kolmogorov–Smirnov
//! distance against it.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn standard() -> Normal {
    Normal::standard()
}

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    standard().cdf(x)
}

/// Upper tail `1 - cdf(x)`, computed without cancellation.
pub fn sf(x: f64) -> f64 {
    standard().sf(x)
}

pub fn pdf(x: f64) -> f64 {
    standard().pdf(x)
}

/// `z_alpha`, the `(1 - alpha)`-quantile.
pub fn upper_quantile(alpha: f64) -> f64 {
    -standard().inverse_cdf(alpha)
}

/// `sup_x |F_n(x) - Phi(x)|` for the empirical CDF `F_n` of `sample`.
/// Returns `None` for an empty sample or one containing NaN.
pub fn ks_distance(sample: &[f64]) -> Option<f64> {
    if sample.is_empty() || sample.iter().any(|x| x.is_nan()) {
        return None;
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Some(d)
}
