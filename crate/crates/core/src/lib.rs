// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Numerical laboratory for spontaneous wavefunction-collapse models.
//!
//! The crate is organised in layers:
//!
//! * [`quantum`] – grids, state vectors, density matrices and Hermitian operators.
//! * [`grw`] – Poisson-timed spontaneous localizations and the GRW master equation.
//! * [`sde`] – continuous collapse unravelings (Itô collapse equation, imaginary noise,
//!   CSL and Diósi noise fields on a grid).
//! * [`master`] – deterministic density-matrix evolution (Lindblad, CSL, DP, linearized
//!   and colored master equations) together with DP decay times and CSL diffusion tensors.
//! * [`pheno`] – closed-form experimental predictions for white, colored and dissipative
//!   collapse models.
//! * [`bounds`] – inversion of experimental limits into exclusion regions.
//! * [`io`] – configuration, ensemble orchestration, CSV/JSON export and run manifests.

pub mod bounds;
pub mod constants;
pub mod error;
pub mod grw;
pub mod io;
pub mod linalg;
pub mod master;
pub mod pheno;
pub mod quad;
pub mod quantum;
pub mod rng;
pub mod sde;
pub mod stats;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use num_complex::Complex64;
