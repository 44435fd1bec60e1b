// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Particles of equal mass, optionally with rigid-body positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSpec {
    pub mass: f64,
    pub count: usize,
    #[serde(default)]
    pub positions: Vec<[f64; 3]>,
}

impl ParticleSpec {
    pub fn new(mass: f64, count: usize) -> Result<Self> {
        Self::with_positions(mass, count, Vec::new())
    }

    pub fn with_positions(mass: f64, count: usize, positions: Vec<[f64; 3]>) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be > 0, got {mass}")));
        }
        if count == 0 {
            return Err(Error::InvalidParameter("particle count must be >= 1".into()));
        }
        if !positions.is_empty() && positions.len() != count {
            return Err(Error::DimensionMismatch {
                expected: count,
                actual: positions.len(),
            });
        }
        Ok(Self {
            mass,
            count,
            positions,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.mass * self.count as f64
    }
}
