// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::linalg::{c, commutator, von_neumann, CMatrix};
use crate::master::mass::{envelope_integral, sinc_complement_integral, MassDistribution};
use crate::quad::gauss_legendre;
use crate::quantum::{spatial_correlator, Grid1D, HermitianOperator};

const SPHERE_TAIL: f64 = 100.0;
const GAUSS_TAIL: f64 = 7.0;
const RATE_REL_TOL: f64 = 1e-8;
const PHI_NODES: usize = 128;
const QUAD_NODES: usize = 48;
const K_PANELS: usize = 8;

fn check_rates(lambda: f64, r_c: f64) -> Result<()> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    if !(r_c > 0.0) {
        return Err(Error::InvalidParameter(format!("r_C must be > 0, got {r_c}")));
    }
    Ok(())
}

/// CSL master equation for one particle of mass `m` on a 1D grid: coherences decay as
/// `lambda (m/m0)^2 (1 - G(x - y))`.
#[allow(clippy::too_many_arguments)]
pub fn csl_me_rhs(
    rho: &CMatrix,
    h: &HermitianOperator,
    grid: &Grid1D,
    lambda: f64,
    r_c: f64,
    mass: f64,
    m0: f64,
    hbar: f64,
) -> Result<CMatrix> {
    check_rates(lambda, r_c)?;
    grid.require_resolution(r_c)?;
    grid.require_half_span(8.0 * r_c)?;
    let n = grid.len();
    if rho.nrows() != n || h.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rho.nrows().max(h.dim()),
        });
    }
    let mut out = von_neumann(h.matrix(), rho, hbar);
    let k = lambda * (mass / m0).powi(2);
    if k == 0.0 {
        return Ok(out);
    }
    let xs = grid.points();
    for j in 0..n {
        for l in 0..n {
            let g = spatial_correlator(xs[j], xs[l], r_c);
            out[(j, l)] -= rho[(j, l)] * c(k * (1.0 - g));
        }
    }
    Ok(out)
}

fn csl_k_cap(distribution: &MassDistribution, r_c: f64) -> (f64, f64) {
    let gauss = GAUSS_TAIL / r_c;
    match distribution {
        MassDistribution::Sphere { radius, .. } => ((1.0 / radius).min(1.0 / r_c), gauss.min(SPHERE_TAIL / radius)),
        _ => (1.0 / r_c, gauss),
    }
}

/// Center-of-mass coherence decay rate for a rigid body displaced by `d` along x.
pub fn csl_com_decay_rate(distribution: &MassDistribution, d: f64, lambda: f64, r_c: f64, m0: f64) -> Result<f64> {
    check_rates(lambda, r_c)?;
    distribution.validate()?;
    if !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!("displacement must be >= 0, got {d}")));
    }
    match distribution {
        MassDistribution::Points(list) => {
            let g = |v: [f64; 3]| (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / (4.0 * r_c * r_c)).exp();
            let mut acc = 0.0;
            for a in list {
                for b in list {
                    let s = [
                        a.position[0] - b.position[0],
                        a.position[1] - b.position[1],
                        a.position[2] - b.position[2],
                    ];
                    let shifted = [s[0] + d, s[1], s[2]];
                    acc += a.mass * b.mass * (g(s) - g(shifted));
                }
            }
            Ok(lambda / (m0 * m0) * acc)
        }
        MassDistribution::Sphere { .. } => {
            let (scale, k_max) = csl_k_cap(distribution, r_c);
            let f = |k: f64| {
                let mu = distribution.radial_form_factor(k).unwrap_or(0.0);
                k * k * mu * mu * (-k * k * r_c * r_c).exp()
            };
            let integral = sinc_complement_integral(f, d, scale, k_max, RATE_REL_TOL)?;
            let pre = lambda * r_c.powi(3) / (std::f64::consts::PI.powf(1.5) * m0 * m0);
            Ok(pre * 4.0 * std::f64::consts::PI * integral)
        }
    }
}

/// Symmetric positive semidefinite 3x3 diffusion tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionTensor {
    eta: Matrix3<f64>,
}

impl DiffusionTensor {
    pub fn new(eta: Matrix3<f64>) -> Result<Self> {
        let scale = eta.amax().max(f64::MIN_POSITIVE);
        if (eta - eta.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidParameter("diffusion tensor is not symmetric".into()));
        }
        let min = SymmetricEigen::new(eta).eigenvalues.min();
        if min < -1e-12 * scale {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        Ok(Self { eta })
    }

    pub fn isotropic(value: f64) -> Result<Self> {
        Self::new(Matrix3::identity() * value)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.eta
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.eta[(i, j)]
    }
}

/// `eta_ij = (lambda r_C^3 / 2 pi^{3/2} m0^2) int d^3k |mu~(k)|^2 k_i k_j exp(-k^2 r_C^2)`.
pub fn eta_tensor(distribution: &MassDistribution, lambda: f64, r_c: f64, m0: f64) -> Result<DiffusionTensor> {
    check_rates(lambda, r_c)?;
    distribution.validate()?;
    let pi = std::f64::consts::PI;
    let pre = lambda * r_c.powi(3) / (2.0 * pi.powf(1.5) * m0 * m0);
    let mut eta = Matrix3::zeros();
    match distribution {
        MassDistribution::Points(list) => {
            let r2 = r_c * r_c;
            let gauss_norm = (pi / r2).powf(1.5);
            for a in list {
                for b in list {
                    let s = Vector3::from_fn(|i, _| a.position[i] - b.position[i]);
                    let e = (-s.norm_squared() / (4.0 * r2)).exp();
                    for i in 0..3 {
                        for j in 0..3 {
                            let delta = if i == j { 1.0 } else { 0.0 };
                            eta[(i, j)] += a.mass * b.mass * gauss_norm * e * (delta / (2.0 * r2) - s[i] * s[j] / (4.0 * r2 * r2));
                        }
                    }
                }
            }
        }
        MassDistribution::Sphere { .. } => {
            let (scale, k_max) = csl_k_cap(distribution, r_c);
            let f = |k: f64| {
                let mu = distribution.radial_form_factor(k).unwrap_or(0.0);
                k.powi(4) * mu * mu * (-k * k * r_c * r_c).exp()
            };
            let radial = envelope_integral(f, scale, k_max, RATE_REL_TOL)?;
            let v = 4.0 * pi / 3.0 * radial;
            eta = Matrix3::identity() * v;
        }
    }
    DiffusionTensor::new(eta * pre)
}

/// [`eta_tensor`] by direct quadrature of the k-space integral in spherical coordinates,
/// with `|mu~(k)|^2` summed over the point masses; spheres fall back to [`eta_tensor`].
///
/// Composite Gauss-Legendre in `k` and `theta`, trapezoid rule in the periodic `phi`.
pub fn eta_tensor_quadrature(distribution: &MassDistribution, lambda: f64, r_c: f64, m0: f64) -> Result<DiffusionTensor> {
    check_rates(lambda, r_c)?;
    distribution.validate()?;
    let list = match distribution {
        MassDistribution::Points(list) => list,
        MassDistribution::Sphere { .. } => return eta_tensor(distribution, lambda, r_c, m0),
    };
    let pi = std::f64::consts::PI;
    let pre = lambda * r_c.powi(3) / (2.0 * pi.powf(1.5) * m0 * m0);
    let (gx, gw) = gauss_legendre(QUAD_NODES);
    let panel = |a: f64, b: f64| -> Vec<(f64, f64)> {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        gx.iter().zip(&gw).map(|(x, w)| (c + h * x, h * w)).collect()
    };
    let k_max = GAUSS_TAIL / r_c;
    let k_nodes: Vec<(f64, f64)> = (0..K_PANELS)
        .flat_map(|p| panel(p as f64 * k_max / K_PANELS as f64, (p + 1) as f64 * k_max / K_PANELS as f64))
        .collect();
    let theta_nodes = panel(0.0, pi);
    let mut eta = Matrix3::zeros();
    for &(k, wk) in &k_nodes {
        let radial = wk * k.powi(4) * (-k * k * r_c * r_c).exp();
        for &(theta, wt) in &theta_nodes {
            let (st, ct) = theta.sin_cos();
            for p in 0..PHI_NODES {
                let (sp, cp) = (2.0 * pi * p as f64 / PHI_NODES as f64).sin_cos();
                let n = [st * cp, st * sp, ct];
                let (mut re, mut im) = (0.0, 0.0);
                for a in list {
                    let arg = k * (n[0] * a.position[0] + n[1] * a.position[1] + n[2] * a.position[2]);
                    re += a.mass * arg.cos();
                    im -= a.mass * arg.sin();
                }
                let w = radial * wt * st * (2.0 * pi / PHI_NODES as f64) * (re * re + im * im);
                for i in 0..3 {
                    for j in 0..3 {
                        eta[(i, j)] += w * n[i] * n[j];
                    }
                }
            }
        }
    }
    DiffusionTensor::new(eta * pre)
}

/// `-(i/hbar)[H, rho] - sum_ij eta_ij [q_i, [q_j, rho]]` for up to three position operators.
pub fn linearized_csl_rhs(
    rho: &CMatrix,
    h: &HermitianOperator,
    eta: &DiffusionTensor,
    q: &[HermitianOperator],
    hbar: f64,
) -> Result<CMatrix> {
    if q.is_empty() || q.len() > 3 {
        return Err(Error::InvalidParameter("between one and three position operators required".into()));
    }
    let d = rho.nrows();
    for op in std::iter::once(h).chain(q) {
        if op.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: op.dim(),
            });
        }
    }
    let mut out = von_neumann(h.matrix(), rho, hbar);
    let inner: Vec<CMatrix> = q.iter().map(|qj| commutator(qj.matrix(), rho)).collect();
    for (i, qi) in q.iter().enumerate() {
        for (j, cj) in inner.iter().enumerate() {
            let e = eta.get(i, j);
            if e != 0.0 {
                out -= commutator(qi.matrix(), cj) * c(e);
            }
        }
    }
    Ok(out)
}

/// One-dimensional form on a grid: coherences decay at `eta (x - y)^2`.
pub fn linearized_csl_rhs_1d(rho: &CMatrix, h: &HermitianOperator, grid: &Grid1D, eta: f64, hbar: f64) -> Result<CMatrix> {
    if !(eta >= 0.0) {
        return Err(Error::NotPositiveSemidefinite(eta));
    }
    let n = grid.len();
    if rho.nrows() != n || h.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rho.nrows().max(h.dim()),
        });
    }
    let mut out = von_neumann(h.matrix(), rho, hbar);
    let xs = grid.points();
    for j in 0..n {
        for l in 0..n {
            let dx = xs[j] - xs[l];
            out[(j, l)] -= rho[(j, l)] * c(eta * dx * dx);
        }
    }
    Ok(out)
}
