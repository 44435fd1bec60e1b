// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Finite-dimensional quantum states, operators and the 1D spatial grid.
//!
//! Grid wavefunctions store point values `psi(x_j)` normalized as `sum |psi_j|^2 dx = 1`.
//! Density matrices and operators are stored in the orthonormal discrete basis
//! `phi_j = sqrt(dx) psi(x_j)`, so that `Tr rho = 1` on grids and abstract bases alike.

mod grid;
mod operator;
mod particle;
mod state;

pub use grid::{gaussian_smear, spatial_correlator, Grid1D};
pub use operator::HermitianOperator;
pub use particle::ParticleSpec;
pub use state::{Basis, DensityMatrix, QuantumState, StateVector};

/// Absolute tolerance on norms and traces.
pub const NORM_TOL: f64 = 1e-10;
/// Hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Slack allowed on the smallest eigenvalue of a density matrix.
pub const PSD_SLACK: f64 = 1e-8;

pub fn expectation<S: QuantumState + ?Sized>(state: &S, a: &HermitianOperator) -> crate::Result<f64> {
    state.expectation(a)
}

pub fn variance<S: QuantumState + ?Sized>(state: &S, a: &HermitianOperator) -> crate::Result<f64> {
    state.variance(a)
}
