// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_residual, max_abs, CMatrix};
use crate::quantum::{Grid1D, HERMITIAN_TOL};

/// Self-adjoint matrix in an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Validates self-adjointness to `1e-12` relative to the largest entry (absolute
    /// below unit scale).
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                actual: entries.ncols(),
            });
        }
        let scale = max_abs(&entries).max(1.0);
        let r = hermitian_residual(&entries);
        if r > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(r));
        }
        Ok(Self { entries })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (j, v) in values.iter().enumerate() {
            m[(j, j)] = c(*v);
        }
        Self { entries: m }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    /// Position operator `diag(x_j)` on a grid.
    pub fn position(grid: &Grid1D) -> Self {
        Self::diagonal(&grid.points())
    }

    /// Pauli `sigma_z = diag(+1, -1)`.
    pub fn sigma_z() -> Self {
        Self::diagonal(&[1.0, -1.0])
    }

    pub fn sigma_x() -> Self {
        Self {
            entries: CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        }
    }

    /// Free-particle kinetic energy `-hbar^2/(2m) d^2/dx^2` by second-order finite
    /// differences with hard walls.
    pub fn kinetic(grid: &Grid1D, mass: f64, hbar: f64) -> Self {
        let n = grid.len();
        let k = hbar * hbar / (2.0 * mass * grid.dx() * grid.dx());
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            m[(j, j)] = c(2.0 * k);
            if j + 1 < n {
                m[(j, j + 1)] = c(-k);
                m[(j + 1, j)] = c(-k);
            }
        }
        Self { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// Real diagonal, when the operator is diagonal.
    pub fn as_diagonal(&self) -> Option<Vec<f64>> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.entries[(i, j)].norm() != 0.0 {
                    return None;
                }
            }
        }
        Some((0..n).map(|j| self.entries[(j, j)].re).collect())
    }

    pub fn is_zero(&self) -> bool {
        max_abs(&self.entries) == 0.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            entries: &self.entries * c(s),
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(Self {
            entries: &self.entries + &other.entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian(_))));
        let ok = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0), Complex64::new(0.0, 2.0), Complex64::new(0.0, -2.0), c(-1.0)],
        );
        assert!(HermitianOperator::new(ok).is_ok());
    }

    #[test]
    fn diagonal_detection() {
        assert_eq!(HermitianOperator::sigma_z().as_diagonal(), Some(vec![1.0, -1.0]));
        assert_eq!(HermitianOperator::sigma_x().as_diagonal(), None);
    }
}
