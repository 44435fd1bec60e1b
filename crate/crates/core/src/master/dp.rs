// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{c, von_neumann, CMatrix};
use crate::master::mass::{sinc_complement_integral, MassDistribution};
use crate::quantum::{Grid1D, HermitianOperator};

const SPHERE_TAIL: f64 = 100.0;
const GAUSS_TAIL: f64 = 7.0;
const DP_REL_TOL: f64 = 1e-8;

/// Mutual potential `erf(s / 2R0) / s` of two unit masses smeared with Gaussians of
/// width `R0`; at `s = 0` it takes the limit `1 / (sqrt(pi) R0)`.
pub fn smeared_coulomb(s: f64, r0: f64) -> f64 {
    let x = s.abs() / (2.0 * r0);
    if x < 1e-4 {
        (1.0 - x * x / 3.0) / (std::f64::consts::PI.sqrt() * r0)
    } else {
        libm::erf(x) / s.abs()
    }
}

fn check_cutoff(r0: f64) -> Result<()> {
    if r0 > 0.0 && r0.is_finite() {
        Ok(())
    } else {
        Err(Error::DivergentSelfEnergy)
    }
}

/// `U(0) - U(d)` with `U(d) = int int mu(r) mu(r' - d x) / |r - r'|` (kg^2 / m).
pub fn dp_self_difference(distribution: &MassDistribution, d: f64, r0: f64) -> Result<f64> {
    check_cutoff(r0)?;
    distribution.validate()?;
    if !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!("displacement must be >= 0, got {d}")));
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    match distribution {
        MassDistribution::Points(list) => {
            let mut acc = 0.0;
            for a in list {
                for b in list {
                    let s = [
                        a.position[0] - b.position[0],
                        a.position[1] - b.position[1],
                        a.position[2] - b.position[2],
                    ];
                    let r = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
                    let rs = ((s[0] + d).powi(2) + s[1] * s[1] + s[2] * s[2]).sqrt();
                    acc += a.mass * b.mass * (smeared_coulomb(r, r0) - smeared_coulomb(rs, r0));
                }
            }
            Ok(acc)
        }
        MassDistribution::Sphere { radius, .. } => {
            let scale = (1.0 / radius).min(1.0 / r0);
            let k_max = (SPHERE_TAIL / radius).min(GAUSS_TAIL / r0);
            let f = |k: f64| {
                let mu = distribution.radial_form_factor(k).unwrap_or(0.0);
                mu * mu * (-k * k * r0 * r0).exp()
            };
            let v = sinc_complement_integral(f, d, scale, k_max, DP_REL_TOL)?;
            Ok(2.0 / std::f64::consts::PI * v)
        }
    }
}

/// `1 / tau_D = (G / hbar) (U(0) - U(d))`.
pub fn dp_decay_rate(distribution: &MassDistribution, d: f64, r0: f64, g: f64, hbar: f64) -> Result<f64> {
    Ok(g / hbar * dp_self_difference(distribution, d, r0)?)
}

/// Decay time `tau_D`; `f64::INFINITY` marks the no-decay case `d = 0`.
pub fn dp_decay_time(distribution: &MassDistribution, d: f64, r0: f64, g: f64, hbar: f64) -> Result<f64> {
    let rate = dp_decay_rate(distribution, d, r0, g, hbar)?;
    Ok(if rate > 0.0 { 1.0 / rate } else { f64::INFINITY })
}

/// Penrose's gravitational self-energy difference `Delta E = 8 pi G (U(0) - U(d))`.
pub fn penrose_delta_e(distribution: &MassDistribution, d: f64, r0: f64, g: f64) -> Result<f64> {
    Ok(8.0 * std::f64::consts::PI * g * dp_self_difference(distribution, d, r0)?)
}

/// DP master equation for a rigid body on a 1D grid; the coherence between `x` and `y`
/// decays at `1 / tau_D(|x - y|)`.
#[allow(clippy::too_many_arguments)]
pub fn dp_me_rhs(
    rho: &CMatrix,
    h: &HermitianOperator,
    grid: &Grid1D,
    distribution: &MassDistribution,
    r0: f64,
    g: f64,
    hbar: f64,
) -> Result<CMatrix> {
    check_cutoff(r0)?;
    grid.require_resolution(r0)?;
    let n = grid.len();
    if rho.nrows() != n || h.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rho.nrows().max(h.dim()),
        });
    }
    let mut out = von_neumann(h.matrix(), rho, hbar);
    if g == 0.0 {
        return Ok(out);
    }
    let xs = grid.points();
    let dx = grid.dx();
    let mut cache: HashMap<usize, f64> = HashMap::new();
    for j in 0..n {
        for l in 0..n {
            if j == l {
                continue;
            }
            let key = j.abs_diff(l);
            let rate = match cache.get(&key) {
                Some(&r) => r,
                None => {
                    let d = (xs[j] - xs[l]).abs().max(0.5 * dx);
                    let r = dp_decay_rate(distribution, d, r0, g, hbar)?;
                    cache.insert(key, r);
                    r
                }
            };
            out[(j, l)] -= rho[(j, l)] * c(rate);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: f64 = 6.67430e-11;
    const HBAR: f64 = 1.054571817e-34;

    #[test]
    fn kernel_limits() {
        let r0 = 1e-9;
        assert!((smeared_coulomb(0.0, r0) - 1.0 / (std::f64::consts::PI.sqrt() * r0)).abs() < 1e-6);
        assert!((smeared_coulomb(1e-6, r0) * 1e-6 - 1.0).abs() < 1e-12);
        let x = 1e-4 * 2.0 * r0;
        assert!((smeared_coulomb(x * 0.999, r0) / smeared_coulomb(x * 1.001, r0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn point_cutoff_required() {
        let p = MassDistribution::point(1e-27).unwrap();
        assert!(matches!(dp_decay_time(&p, 1e-9, 0.0, G, HBAR), Err(Error::DivergentSelfEnergy)));
        assert_eq!(dp_decay_time(&p, 0.0, 1e-15, G, HBAR).unwrap(), f64::INFINITY);
    }

    #[test]
    fn penrose_relation_is_exact() {
        let s = MassDistribution::sphere(1e-5, 1e-12).unwrap();
        let tau = dp_decay_time(&s, 1e-4, 1e-9, G, HBAR).unwrap();
        let de = penrose_delta_e(&s, 1e-4, 1e-9, G).unwrap();
        assert!((HBAR / de * 8.0 * std::f64::consts::PI / tau - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_self_energy() {
        // U(0) = 6 M^2 / 5 R for a homogeneous sphere; U(d) = M^2 / d once separated.
        let (r, m) = (1e-5, 1e-12);
        let s = MassDistribution::sphere(r, m).unwrap();
        let diff = dp_self_difference(&s, 10.0 * r, 1e-12).unwrap();
        let expected = 1.2 * m * m / r - m * m / (10.0 * r);
        assert!((diff / expected - 1.0).abs() < 1e-4, "{diff} {expected}");
    }

    #[test]
    fn point_pair_matches_sphere_integral_for_tiny_sphere() {
        let r0 = 1e-9;
        let point = MassDistribution::point(1e-20).unwrap();
        let tiny = MassDistribution::sphere(1e-13, 1e-20).unwrap();
        for &d in &[1e-10, 1e-9, 5e-9] {
            let a = dp_self_difference(&point, d, r0).unwrap();
            let b = dp_self_difference(&tiny, d, r0).unwrap();
            assert!((a / b - 1.0).abs() < 1e-6, "{d}: {a} {b}");
        }
    }
}
