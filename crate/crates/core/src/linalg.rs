// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `-(i/hbar) [H, rho]`.
pub fn von_neumann(h: &CMatrix, rho: &CMatrix, hbar: f64) -> CMatrix {
    commutator(h, rho) * Complex64::new(0.0, -1.0 / hbar)
}

/// Largest elementwise modulus of `m - m^dagger`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigen-decomposition of a Hermitian matrix (the matrix is symmetrized first).
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(sym);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.into_iter().fold(f64::INFINITY, f64::min)
}

/// Trace distance `1/2 ||a - b||_1` for Hermitian arguments.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * hermitian_eigen(&(a - b)).0.iter().map(|v| v.abs()).sum::<f64>()
}

/// Exact propagator `exp(-i H t / hbar)` built from one eigen-decomposition of `H`.
#[derive(Debug, Clone)]
pub struct UnitaryPropagator {
    energies: Vec<f64>,
    basis: CMatrix,
    hbar: f64,
    trivial: bool,
}

impl UnitaryPropagator {
    pub fn new(h: &CMatrix, hbar: f64) -> Self {
        let trivial = max_abs(h) == 0.0;
        let (energies, basis) = hermitian_eigen(h);
        Self {
            energies,
            basis,
            hbar,
            trivial,
        }
    }

    /// Propagator for `H = 0` of dimension `dim`.
    pub fn identity(dim: usize, hbar: f64) -> Self {
        Self::new(&CMatrix::zeros(dim, dim), hbar)
    }

    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn phases(&self, t: f64) -> CVector {
        CVector::from_iterator(
            self.energies.len(),
            self.energies
                .iter()
                .map(|e| Complex64::from_polar(1.0, -e * t / self.hbar)),
        )
    }

    pub fn apply(&self, psi: &CVector, t: f64) -> CVector {
        if self.trivial || t == 0.0 {
            return psi.clone();
        }
        let mut coeffs = self.basis.adjoint() * psi;
        for (ci, ph) in coeffs.iter_mut().zip(self.phases(t).iter()) {
            *ci *= ph;
        }
        &self.basis * coeffs
    }

    pub fn matrix(&self, t: f64) -> CMatrix {
        let d = CMatrix::from_diagonal(&self.phases(t));
        &self.basis * d * self.basis.adjoint()
    }

    /// Heisenberg-picture operator `exp(iHu/hbar) A exp(-iHu/hbar)`.
    pub fn heisenberg(&self, a: &CMatrix, u: f64) -> CMatrix {
        if self.trivial || u == 0.0 {
            return a.clone();
        }
        let uf = self.matrix(u);
        uf.adjoint() * a * uf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    #[test]
    fn propagator_is_unitary_and_matches_closed_form() {
        let p = UnitaryPropagator::new(&sigma_x(), 1.0);
        let psi = CVector::from_vec(vec![c(1.0), c(0.0)]);
        let t = 0.7;
        let out = p.apply(&psi, t);
        assert!((out[0] - c(t.cos())).norm() < 1e-14);
        assert!((out[1] - Complex64::new(0.0, -t.sin())).norm() < 1e-14);
        assert!((out.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states_is_one() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        assert!((trace_distance(&a, &b) - 1.0).abs() < 1e-14);
    }
}
