// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_residual, min_eigenvalue, trace, CMatrix, CVector};
use crate::quantum::{Grid1D, HermitianOperator, HERMITIAN_TOL, NORM_TOL, PSD_SLACK};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    Grid(Grid1D),
    Abstract,
}

impl Basis {
    /// Quadrature weight `w_j`: `dx` on grids, `1` otherwise.
    pub fn weight(&self) -> f64 {
        match self {
            Basis::Grid(g) => g.dx(),
            Basis::Abstract => 1.0,
        }
    }

    pub fn grid(&self) -> Option<&Grid1D> {
        match self {
            Basis::Grid(g) => Some(g),
            Basis::Abstract => None,
        }
    }
}

pub trait QuantumState {
    fn dim(&self) -> usize;
    fn expectation(&self, a: &HermitianOperator) -> Result<f64>;

    fn variance(&self, a: &HermitianOperator) -> Result<f64> {
        let m = self.expectation(a)?;
        let a2 = HermitianOperator::new(a.matrix() * a.matrix())?;
        Ok(self.expectation(&a2)? - m * m)
    }
}

fn real_part(z: Complex64, scale: f64) -> Result<f64> {
    if z.im.abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::NotHermitian(z.im.abs()));
    }
    Ok(z.re)
}

/// Pure state. On grids the amplitudes are wavefunction values `psi(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    basis: Basis,
}

impl StateVector {
    pub fn new(amplitudes: CVector, basis: Basis) -> Result<Self> {
        if let Basis::Grid(g) = &basis {
            if g.len() != amplitudes.len() {
                return Err(Error::DimensionMismatch {
                    expected: g.len(),
                    actual: amplitudes.len(),
                });
            }
        }
        Ok(Self { amplitudes, basis })
    }

    /// Builds and normalizes a state; fails on the zero vector.
    pub fn normalized_from(amplitudes: CVector, basis: Basis) -> Result<Self> {
        let mut s = Self::new(amplitudes, basis)?;
        s.normalize()?;
        Ok(s)
    }

    pub fn abstract_from(amplitudes: &[Complex64]) -> Result<Self> {
        Self::normalized_from(CVector::from_column_slice(amplitudes), Basis::Abstract)
    }

    /// Normalized superposition of Gaussian packets `exp(-(x - c)^2 / 2 width^2)` with
    /// complex weights.
    pub fn gaussian_packets(grid: &Grid1D, centers: &[f64], width: f64, weights: &[Complex64]) -> Result<Self> {
        if centers.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                actual: weights.len(),
            });
        }
        if !(width > 0.0) {
            return Err(Error::InvalidParameter(format!("packet width must be > 0, got {width}")));
        }
        let amps = CVector::from_iterator(
            grid.len(),
            grid.points().into_iter().map(|x| {
                centers
                    .iter()
                    .zip(weights)
                    .map(|(c0, w)| w * (-(x - c0) * (x - c0) / (2.0 * width * width)).exp())
                    .sum::<Complex64>()
            }),
        );
        Self::normalized_from(amps, Basis::Grid(*grid))
    }

    /// Equal-weight two-packet state centered at `+-separation/2`.
    pub fn two_packets(grid: &Grid1D, separation: f64, width: f64) -> Result<Self> {
        let h = 0.5 * separation;
        Self::gaussian_packets(grid, &[-h, h], width, &[c(1.0), c(1.0)])
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut CVector {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn weight(&self) -> f64 {
        self.basis.weight()
    }

    /// `sum |psi_j|^2 w_j`.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.norm_squared() * self.weight()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= NORM_TOL
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::Unnormalized(self.norm_sq()))
        }
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm_sq();
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::VanishingNorm(n2.sqrt()));
        }
        self.amplitudes /= c(n2.sqrt());
        Ok(())
    }

    /// Amplitudes in the orthonormal discrete basis, `sqrt(w) psi_j`.
    pub fn orthonormal_amplitudes(&self) -> CVector {
        &self.amplitudes * c(self.weight().sqrt())
    }

    /// `|<phi|psi>|^2` with the basis weight.
    pub fn overlap_sq(&self, other: &Self) -> f64 {
        (self.amplitudes.dotc(&other.amplitudes) * self.weight()).norm_sqr()
    }

    /// Population `|psi_j|^2 w_j` of each basis element.
    pub fn populations(&self) -> Vec<f64> {
        let w = self.weight();
        self.amplitudes.iter().map(|a| a.norm_sqr() * w).collect()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

impl QuantumState for StateVector {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    fn expectation(&self, a: &HermitianOperator) -> Result<f64> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: a.dim(),
            });
        }
        let av = a.matrix() * &self.amplitudes;
        let z = self.amplitudes.dotc(&av) * self.weight();
        real_part(z, crate::linalg::max_abs(a.matrix()))
    }
}

/// Hermitian, trace-one, positive semidefinite matrix in the orthonormal discrete basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    basis: Basis,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let phi = psi.orthonormal_amplitudes();
        Self {
            entries: &phi * phi.adjoint(),
            basis: psi.basis,
        }
    }

    /// Ensemble average of pure projectors, accumulated in index order.
    pub fn from_ensemble<'a, I: IntoIterator<Item = &'a StateVector>>(states: I) -> Result<Self> {
        let mut it = states.into_iter();
        let first = it.next().ok_or(Error::EmptyEnsemble)?;
        let mut acc = DensityMatrix::from_pure(first).entries;
        let mut n = 1usize;
        for s in it {
            if s.amplitudes.len() != acc.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: acc.nrows(),
                    actual: s.amplitudes.len(),
                });
            }
            let phi = s.orthonormal_amplitudes();
            acc += &phi * phi.adjoint();
            n += 1;
        }
        acc /= c(n as f64);
        Ok(Self {
            entries: acc,
            basis: first.basis,
        })
    }

    /// Wraps a matrix without validation (integrator intermediates).
    pub fn from_matrix_unchecked(entries: CMatrix, basis: Basis) -> Self {
        Self { entries, basis }
    }

    /// Wraps a matrix after checking Hermiticity, trace and positivity.
    pub fn from_matrix(entries: CMatrix, basis: Basis) -> Result<Self> {
        let rho = Self { entries, basis };
        rho.validate()?;
        Ok(rho)
    }

    pub fn validate(&self) -> Result<()> {
        let r = hermitian_residual(&self.entries);
        if r > HERMITIAN_TOL {
            return Err(Error::NotHermitian(r));
        }
        let tr = trace(&self.entries);
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::Unnormalized(tr.re));
        }
        let e = min_eigenvalue(&self.entries);
        if e < -PSD_SLACK {
            return Err(Error::NotPositiveSemidefinite(e));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn trace(&self) -> Complex64 {
        trace(&self.entries)
    }

    /// Position-representation kernel `rho(x_j, x_k) = rho_jk / dx` (plain entry on
    /// abstract bases).
    pub fn kernel(&self, j: usize, k: usize) -> Complex64 {
        self.entries[(j, k)] / c(self.basis.weight())
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn expectation(&self, a: &HermitianOperator) -> Result<f64> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: a.dim(),
            });
        }
        let z = trace(&(&self.entries * a.matrix()));
        real_part(z, crate::linalg::max_abs(a.matrix()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus_state() -> StateVector {
        StateVector::abstract_from(&[c(1.0), c(1.0)]).unwrap()
    }

    #[test]
    fn spin_plus_statistics() {
        let psi = plus_state();
        let sz = HermitianOperator::sigma_z();
        assert!(psi.expectation(&sz).unwrap().abs() < 1e-15);
        assert!((psi.variance(&sz).unwrap() - 1.0).abs() < 1e-15);
        let rho = psi.density();
        assert!(rho.expectation(&sz).unwrap().abs() < 1e-15);
        assert!((rho.variance(&sz).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenstate_has_zero_variance() {
        let up = StateVector::abstract_from(&[c(1.0), c(0.0)]).unwrap();
        assert_eq!(up.variance(&HermitianOperator::sigma_z()).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let psi = plus_state();
        let a = HermitianOperator::diagonal(&[1.0, 2.0, 3.0]);
        assert!(matches!(psi.expectation(&a), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn grid_density_has_unit_trace() {
        let g = Grid1D::symmetric(5.0, 201).unwrap();
        let psi = StateVector::two_packets(&g, 4.0, 0.5).unwrap();
        assert!(psi.is_normalized());
        let rho = psi.density();
        assert!(rho.validate().is_ok());
        let x = HermitianOperator::position(&g);
        assert!(psi.expectation(&x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn zero_vector_cannot_be_normalized() {
        let z = CVector::zeros(3);
        assert!(matches!(
            StateVector::normalized_from(z, Basis::Abstract),
            Err(Error::VanishingNorm(_))
        ));
    }
}
