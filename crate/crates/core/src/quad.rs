// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive Gauss-Kronrod quadrature and fixed Gauss-Legendre rules.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive G7-K15 quadrature of `f` on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_pieces(&f, &[a, b], opts)
}

/// As [`integrate`], with the interval pre-split at the given ordered breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, points: &[f64], opts: QuadOptions) -> Result<QuadResult> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidParameter(
            "quadrature breakpoints must be ordered".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(f, w[0], w[1]));
        }
    }
    if heap.is_empty() {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let max_intervals = opts.max_intervals.max(2 * heap.len());
    let mut value: f64 = heap.iter().map(|s| s.value).sum();
    let mut error: f64 = heap.iter().map(|s| s.error).sum();
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        if iterations.is_multiple_of(256) {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target || error <= 50.0 * f64::EPSILON * value.abs() {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
            return Ok(QuadResult { value, error });
        }
        if heap.len() >= max_intervals {
            return Err(Error::Quadrature {
                estimate: value,
                error,
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            return Err(Error::Quadrature {
                estimate: value,
                error,
            });
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// Integral over `[a, inf)` via `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, opts: QuadOptions) -> Result<QuadResult> {
    let g = |t: f64| {
        let one_minus = 1.0 - t;
        let x = a + t / one_minus;
        let v = f(x) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, opts)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite trapezoid rule for samples on a uniform mesh of spacing `h`.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (samples[0] + samples[n - 1]) + samples[1..n - 1].iter().sum::<f64>()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral() {
        let r = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, QuadOptions::default()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite() {
        let r = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reports_failure_with_estimate() {
        let opts = QuadOptions {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
