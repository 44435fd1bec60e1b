// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Cancellation-free exponential helpers for the dissipative cold-atom closed form.

const SERIES_RADIUS: f64 = 0.5;
const TERMS: usize = 40;

/// `(1 - e^{-x}) / x`.
pub(crate) fn phi1(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(x - 1 + e^{-x}) / x^2 = (1 - phi1(x)) / x`.
pub(crate) fn psi2(x: f64) -> f64 {
    if x.abs() < SERIES_RADIUS {
        let mut term = 0.5;
        let mut sum = 0.0;
        for k in 0..TERMS {
            sum += term;
            term *= -x / (k as f64 + 3.0);
        }
        sum
    } else {
        (x + (-x).exp_m1()) / (x * x)
    }
}

fn phi1_derivative(x: f64) -> f64 {
    (x * (-x).exp() + (-x).exp_m1()) / (x * x)
}

/// `sum_k a_k h_{k - shift}(b, c)` with `a_k = (-1)^k / (k+1)!` and `h_n` the complete
/// homogeneous polynomial of degree `n`, starting at `k = start`.
fn homogeneous_series(b: f64, c: f64, start: usize, shift: usize) -> f64 {
    let mut h = 1.0;
    let mut c_pow = 1.0;
    let mut coeff = 1.0;
    for k in 1..=start {
        coeff *= -1.0 / (k as f64 + 1.0);
    }
    let mut degree = 0usize;
    let mut sum = 0.0;
    for k in start..start + TERMS {
        while degree < k - shift {
            degree += 1;
            c_pow *= c;
            h = b * h + c_pow;
        }
        sum += coeff * h;
        coeff *= -1.0 / (k as f64 + 2.0);
    }
    sum
}

/// Divided difference `phi1[b, c] = (phi1(b) - phi1(c)) / (b - c)`, plus one half.
pub(crate) fn divided_phi1_plus_half(b: f64, c: f64) -> f64 {
    if b.abs().max(c.abs()) < SERIES_RADIUS {
        return homogeneous_series(b, c, 2, 1);
    }
    let scale = b.abs().max(c.abs());
    if (b - c).abs() <= 1e-6 * scale {
        phi1_derivative(0.5 * (b + c)) + 0.5
    } else {
        (phi1(b) - phi1(c)) / (b - c) + 0.5
    }
}

/// `(phi1[b, c] + psi2(b)) / c`, finite as `b, c -> 0` (limit `1/6`).
pub(crate) fn dissipative_kernel(b: f64, c: f64) -> f64 {
    if b.abs().max(c.abs()) < SERIES_RADIUS {
        return homogeneous_series(b, c, 2, 2);
    }
    (divided_phi1_plus_half(b, c) - 0.5 + psi2(b)) / c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_kernel(b: f64, c: f64) -> f64 {
        let dd = (phi1(b) - phi1(c)) / (b - c);
        (dd + (1.0 - phi1(b)) / b) / c
    }

    #[test]
    fn series_matches_direct_at_moderate_arguments() {
        for &(b, c) in &[(0.3, 0.2), (0.45, 0.49), (0.1, 0.05)] {
            let s = homogeneous_series(b, c, 2, 2);
            assert!((s - direct_kernel(b, c)).abs() < 1e-9, "{b} {c}");
            let d = homogeneous_series(b, c, 2, 1);
            assert!((d - ((phi1(b) - phi1(c)) / (b - c) + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn branches_are_continuous() {
        let below = dissipative_kernel(0.4999, 0.4);
        let above = dissipative_kernel(0.5001, 0.4);
        assert!((below - above).abs() < 1e-4 * below.abs());
        assert!((dissipative_kernel(0.0, 0.0) - 1.0 / 6.0).abs() < 1e-16);
        assert!((psi2(0.4999) - psi2(0.5001)).abs() < 1e-4);
        assert_eq!(psi2(0.0), 0.5);
    }

    #[test]
    fn equal_arguments_use_derivative() {
        let v = divided_phi1_plus_half(2.0, 2.0);
        let h = 1e-5;
        let fd = (phi1(2.0 + h) - phi1(2.0 - h)) / (2.0 * h) + 0.5;
        assert!((v - fd).abs() < 1e-8);
    }
}
