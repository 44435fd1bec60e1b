// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Density-matrix dynamics: Lindblad, GRW/CSL/DP master equations, the linearized
//! diffusive limit, DP decay times and the perturbative colored master equation.

mod colored;
mod csl;
mod dp;
mod integrate;
mod lindblad;
mod mass;

pub use colored::{colored_me_rhs, TimeKernel};
pub use csl::{
    csl_com_decay_rate, csl_me_rhs, eta_tensor, eta_tensor_quadrature, linearized_csl_rhs, linearized_csl_rhs_1d, DiffusionTensor,
};
pub use dp::{dp_decay_rate, dp_decay_time, dp_me_rhs, dp_self_difference, penrose_delta_e, smeared_coulomb};
pub use integrate::{rk4_step, Rk4};
pub use lindblad::{lindblad_rhs, Convention};
pub use mass::MassDistribution;
