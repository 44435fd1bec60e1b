// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_pieces, integrate_to_infinity, QuadOptions};

const MAX_OSCILLATION_PIECES: f64 = 2e5;

/// Rigid mass density: point masses or a homogeneous sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MassDistribution {
    Points(Vec<PointMass>),
    Sphere { radius: f64, mass: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMass {
    pub mass: f64,
    pub position: [f64; 3],
}

impl MassDistribution {
    pub fn point(mass: f64) -> Result<Self> {
        Self::points(&[(mass, [0.0; 3])])
    }

    pub fn points(list: &[(f64, [f64; 3])]) -> Result<Self> {
        let d = MassDistribution::Points(
            list.iter()
                .map(|&(mass, position)| PointMass { mass, position })
                .collect(),
        );
        d.validate()?;
        Ok(d)
    }

    /// `n` equal masses on the x axis with the given spacing, centered at the origin.
    pub fn chain(n: usize, mass: f64, spacing: f64) -> Result<Self> {
        let off = 0.5 * (n as f64 - 1.0) * spacing;
        let list: Vec<_> = (0..n).map(|i| (mass, [i as f64 * spacing - off, 0.0, 0.0])).collect();
        Self::points(&list)
    }

    pub fn sphere(radius: f64, mass: f64) -> Result<Self> {
        let d = MassDistribution::Sphere { radius, mass };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MassDistribution::Points(list) => {
                if list.is_empty() {
                    return Err(Error::InvalidParameter("point list is empty".into()));
                }
                if list.iter().any(|p| !(p.mass > 0.0) || p.position.iter().any(|v| !v.is_finite())) {
                    return Err(Error::InvalidParameter("point masses must be > 0 at finite positions".into()));
                }
            }
            MassDistribution::Sphere { radius, mass } => {
                if !(*radius > 0.0) || !(*mass > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "sphere needs radius > 0 and mass > 0, got R = {radius}, M = {mass}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            MassDistribution::Points(list) => list.iter().map(|p| p.mass).sum(),
            MassDistribution::Sphere { mass, .. } => *mass,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            MassDistribution::Points(list) => MassDistribution::Points(
                list.iter()
                    .map(|p| PointMass {
                        mass: p.mass * factor,
                        position: p.position,
                    })
                    .collect(),
            ),
            MassDistribution::Sphere { radius, mass } => MassDistribution::Sphere {
                radius: *radius,
                mass: mass * factor,
            },
        }
    }

    /// Fourier transform `mu~(k)` of a spherically symmetric density (sphere or single point).
    pub(crate) fn radial_form_factor(&self, k: f64) -> Option<f64> {
        match self {
            MassDistribution::Sphere { radius, mass } => Some(mass * sphere_form_factor(k * radius)),
            MassDistribution::Points(list) if list.len() == 1 => Some(list[0].mass),
            _ => None,
        }
    }
}

fn envelope_breakpoints(k_scale: f64, k_max: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut k = 0.25 * k_scale;
    while k < k_max {
        pts.push(k);
        k *= 2.0;
    }
    pts.push(k_max);
    pts
}

fn tail<G: Fn(f64) -> f64>(g: &G, k_max: f64, body: f64, opts: QuadOptions) -> Result<f64> {
    let opts = QuadOptions {
        abs_tol: opts.rel_tol * body.abs() / k_max,
        ..opts
    };
    Ok(k_max * integrate_to_infinity(|v| g(k_max * (1.0 + v)), 0.0, opts)?.value)
}

/// `int_0^inf g(k) dk` for a smooth envelope with structure at `k_scale` and most of its
/// weight below `k_max`.
pub(crate) fn envelope_integral<G: Fn(f64) -> f64>(g: G, k_scale: f64, k_max: f64, rel_tol: f64) -> Result<f64> {
    let opts = QuadOptions::rel(rel_tol);
    let body = integrate_pieces(&g, &envelope_breakpoints(k_scale, k_max), opts)?.value;
    Ok(body + tail(&g, k_max, body, opts)?)
}

/// `int_0^inf g(k) (1 - sin(kd)/(kd)) dk`. The oscillatory factor is resolved period by
/// period below `k_max` and dropped above it; for very large `d` the Dirichlet limit
/// `pi g(0) / 2d` replaces the oscillatory part.
pub(crate) fn sinc_complement_integral<G: Fn(f64) -> f64>(
    g: G,
    d: f64,
    k_scale: f64,
    k_max: f64,
    rel_tol: f64,
) -> Result<f64> {
    if d == 0.0 {
        return Ok(0.0);
    }
    let opts = QuadOptions::rel(rel_tol);
    let periods = k_max * d / std::f64::consts::PI;
    if periods > MAX_OSCILLATION_PIECES {
        let total = envelope_integral(&g, k_scale, k_max, rel_tol)?;
        return Ok(total - std::f64::consts::FRAC_PI_2 * g(0.0) / d);
    }
    let mut pts = envelope_breakpoints(k_scale, k_max);
    let step = std::f64::consts::PI / d;
    let mut k = step;
    while k < k_max {
        pts.push(k);
        k += step;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let f = |k: f64| g(k) * one_minus_sinc(k * d);
    let body = integrate_pieces(&f, &pts, opts)?.value;
    Ok(body + tail(&g, k_max, body, opts)?)
}

/// `3 (sin x - x cos x) / x^3`, with its series near zero.
pub(crate) fn sphere_form_factor(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0
    } else {
        3.0 * (x.sin() - x * x.cos()) / (x * x * x)
    }
}

/// `1 - sin(x) / x`, accurate for small `x`.
pub(crate) fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        x2 / 6.0 - x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0
    } else {
        1.0 - x.sin() / x
    }
}
