// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ensemble statistics: means, standard errors, bootstrap bands and small fits.

use rand::Rng;

use crate::rng;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean (sample standard deviation / sqrt(n)).
pub fn std_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Binomial standard deviation of a frequency estimate.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Index vectors for `reps` bootstrap resamples of `n` items, from a fixed seed.
pub fn bootstrap_indices(n: usize, reps: usize, seed: u64) -> Vec<Vec<usize>> {
    (0..reps)
        .map(|r| {
            let mut g = rng::stream(seed, r as u64);
            (0..n).map(|_| g.gen_range(0..n)).collect()
        })
        .collect()
}

/// Two-sided percentile band of the bootstrap distribution of the mean.
pub fn bootstrap_mean_band(xs: &[f64], reps: usize, level: f64, seed: u64) -> (f64, f64) {
    let mut means: Vec<f64> = bootstrap_indices(xs.len(), reps, seed)
        .iter()
        .map(|idx| idx.iter().map(|&i| xs[i]).sum::<f64>() / idx.len() as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let lo = quantile_sorted(&means, 0.5 * (1.0 - level));
    let hi = quantile_sorted(&means, 1.0 - 0.5 * (1.0 - level));
    (lo, hi)
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    let f = pos - i as f64;
    sorted[i] * (1.0 - f) + sorted[j] * f
}

/// Least-squares slope of `y = k x` (line through the origin).
pub fn slope_through_origin(x: &[f64], y: &[f64]) -> f64 {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    sxy / sxx
}

/// Ordinary least squares `y = a + b x`, returning `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Exponent of a power law `y ~ x^p` fitted in log-log space.
pub fn power_law_exponent(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_recover_exact_lines() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 + 2.0 * v).collect();
        let (a, b) = linear_fit(&x, &y);
        assert!((a - 0.5).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        let y2: Vec<f64> = x.iter().map(|v| 3.0 * v * v).collect();
        assert!((power_law_exponent(&x, &y2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_band_brackets_mean() {
        let xs: Vec<f64> = (0..200).map(|i| (i % 7) as f64).collect();
        let (lo, hi) = bootstrap_mean_band(&xs, 400, 0.95, 1);
        let m = mean(&xs);
        assert!(lo < m && m < hi);
    }
}
