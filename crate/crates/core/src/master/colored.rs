// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, von_neumann, CMatrix, UnitaryPropagator};
use crate::quantum::HermitianOperator;

const KERNEL_CUTOFF: f64 = 1e-12;
const NODES_PER_SCALE: f64 = 20.0;
const MAX_NODES: usize = 200_000;

/// Time correlation `f(t - s)` of the collapse noise, normalized so that its integral
/// over the real line is one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeKernel {
    White,
    /// `(Omega/2) exp(-Omega |u|)`.
    Exponential { omega: f64 },
    /// Centered Gaussian of standard deviation `width`.
    Gaussian { width: f64 },
}

impl TimeKernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TimeKernel::White => Ok(()),
            TimeKernel::Exponential { omega: v } | TimeKernel::Gaussian { width: v } if v > 0.0 && v.is_finite() => Ok(()),
            _ => Err(Error::InvalidParameter(format!("kernel scale must be > 0: {self:?}"))),
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        match *self {
            TimeKernel::White => 0.0,
            TimeKernel::Exponential { omega } => 0.5 * omega * (-omega * u.abs()).exp(),
            TimeKernel::Gaussian { width } => {
                (-0.5 * (u / width).powi(2)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * width)
            }
        }
    }

    /// `int_0^t f(u) du`.
    pub fn weight_up_to(&self, t: f64) -> f64 {
        match *self {
            TimeKernel::White => 0.5,
            TimeKernel::Exponential { omega } => 0.5 * (1.0 - (-omega * t).exp()),
            TimeKernel::Gaussian { width } => 0.5 * libm::erf(t / (std::f64::consts::SQRT_2 * width)),
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            TimeKernel::White => 0.0,
            TimeKernel::Exponential { omega } => 1.0 / omega,
            TimeKernel::Gaussian { width } => width,
        }
    }

    /// Lag beyond which the kernel is below `1e-12` of its peak.
    fn memory(&self) -> f64 {
        let l = (1.0 / KERNEL_CUTOFF).ln();
        match *self {
            TimeKernel::White => 0.0,
            TimeKernel::Exponential { omega } => l / omega,
            TimeKernel::Gaussian { width } => width * (2.0 * l).sqrt(),
        }
    }
}

/// Perturbative colored-noise master equation with `D_ij(t, s) = C_ij f(t - s)`.
///
/// The memory integral runs over `u = t - s` in `[0, t]` with the trapezoid rule on a
/// mesh of step `min(mesh_dt, scale / 20)`, truncated once the kernel has decayed.
/// `corr = None` means `C = 1`.
#[allow(clippy::too_many_arguments)]
pub fn colored_me_rhs(
    rho: &CMatrix,
    h: &HermitianOperator,
    ops: &[HermitianOperator],
    corr: Option<&DMatrix<f64>>,
    gamma: f64,
    kernel: &TimeKernel,
    t: f64,
    mesh_dt: f64,
    hbar: f64,
) -> Result<CMatrix> {
    kernel.validate()?;
    let d = rho.nrows();
    for op in std::iter::once(h).chain(ops) {
        if op.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: op.dim(),
            });
        }
    }
    if let Some(cm) = corr {
        if cm.nrows() != ops.len() || cm.ncols() != ops.len() {
            return Err(Error::DimensionMismatch {
                expected: ops.len(),
                actual: cm.nrows(),
            });
        }
        if (cm - cm.transpose()).amax() > 1e-12 * cm.amax().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter("noise correlation matrix is not symmetric".into()));
        }
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let mut out = von_neumann(h.matrix(), rho, hbar);
    if gamma == 0.0 || ops.is_empty() {
        return Ok(out);
    }
    let propagator = UnitaryPropagator::new(h.matrix(), hbar);
    // rotated[j] = int_0^t f(u) A_j(-u) du
    let rotated: Vec<CMatrix> = match kernel {
        TimeKernel::White => ops.iter().map(|a| a.matrix() * c(0.5)).collect(),
        _ if propagator.is_trivial() => ops.iter().map(|a| a.matrix() * c(kernel.weight_up_to(t))).collect(),
        _ => {
            let span = t.min(kernel.memory());
            if span == 0.0 {
                ops.iter().map(|a| a.matrix() * c(0.0)).collect()
            } else {
                let step = mesh_dt.min(kernel.scale() / NODES_PER_SCALE);
                let n = ((span / step).ceil() as usize).clamp(1, MAX_NODES);
                let hstep = span / n as f64;
                let mut acc: Vec<CMatrix> = ops.iter().map(|a| CMatrix::zeros(a.dim(), a.dim())).collect();
                for k in 0..=n {
                    let u = k as f64 * hstep;
                    let w = kernel.value(u) * hstep * if k == 0 || k == n { 0.5 } else { 1.0 };
                    let uf = propagator.matrix(-u);
                    let uf_dag = uf.adjoint();
                    for (a, slot) in ops.iter().zip(acc.iter_mut()) {
                        *slot += &uf_dag * a.matrix() * &uf * c(w);
                    }
                }
                acc
            }
        }
    };
    for (i, a) in ops.iter().enumerate() {
        let mut b = CMatrix::zeros(d, d);
        for (j, r) in rotated.iter().enumerate() {
            let cij = corr.map_or(if i == j { 1.0 } else { 0.0 }, |m| m[(i, j)]);
            if cij != 0.0 {
                b += r * c(cij);
            }
        }
        let am = a.matrix();
        let term = am * rho * &b + &b * rho * am - am * &b * rho - rho * &b * am;
        out += term * c(gamma);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master::{lindblad_rhs, Convention};
    use crate::quantum::StateVector;

    fn plus() -> CMatrix {
        StateVector::abstract_from(&[c(1.0), c(1.0)]).unwrap().density().into_matrix()
    }

    #[test]
    fn white_kernel_is_half_rate_lindblad() {
        let h = HermitianOperator::sigma_x().scaled(0.3);
        let ops = [HermitianOperator::sigma_z()];
        let a = colored_me_rhs(&plus(), &h, &ops, None, 0.2, &TimeKernel::White, 1.0, 0.01, 1.0).unwrap();
        let b = lindblad_rhs(&plus(), &h, &ops, 0.2, Convention::HalfRate, 1.0).unwrap();
        assert!(crate::linalg::max_abs(&(a - b)) < 1e-15);
    }

    #[test]
    fn narrow_gaussian_approaches_white() {
        let h = HermitianOperator::sigma_x().scaled(0.7);
        let ops = [HermitianOperator::sigma_z()];
        let dt = 1e-2;
        let white = colored_me_rhs(&plus(), &h, &ops, None, 0.2, &TimeKernel::White, 1.0, dt, 1.0).unwrap();
        let narrow = colored_me_rhs(&plus(), &h, &ops, None, 0.2, &TimeKernel::Gaussian { width: dt / 10.0 }, 1.0, dt, 1.0).unwrap();
        let rel = crate::linalg::max_abs(&(&narrow - &white)) / crate::linalg::max_abs(&white);
        assert!(rel < 1e-3, "{rel}");
    }

    #[test]
    fn exponential_weight_without_hamiltonian() {
        let ops = [HermitianOperator::sigma_z()];
        let h = HermitianOperator::zeros(2);
        let k = TimeKernel::Exponential { omega: 3.0 };
        let out = colored_me_rhs(&plus(), &h, &ops, None, 1.0, &k, 0.4, 0.01, 1.0).unwrap();
        let rate = -out[(0, 1)].re / plus()[(0, 1)].re;
        assert!((rate - 4.0 * k.weight_up_to(0.4)).abs() < 1e-14);
    }
}
