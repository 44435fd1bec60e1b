// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Physical constants, loaded from a single versioned data file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EMBEDDED: &str = include_str!("../data/constants.json");

/// Environment variable naming a replacement constants file.
pub const CONSTANTS_ENV: &str = "COLLAPSE_LAB_CONSTANTS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    pub version: String,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Reference mass, one atomic mass unit (kg).
    pub m0: f64,
    /// Newton constant (m^3 kg^-1 s^-2).
    pub g: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Elementary charge (C).
    pub e: f64,
    /// Vacuum permittivity (F/m).
    pub eps0: f64,
    /// Speed of light (m/s).
    pub c: f64,
    /// Stefan-Boltzmann constant (W m^-2 K^-4).
    pub sigma_sb: f64,
    /// Julian year (s).
    pub year: f64,
    /// One kiloelectronvolt (J).
    pub kev: f64,
}

impl PhysicalConstants {
    /// Constants compiled into the binary from `data/constants.json`.
    pub fn codata() -> Self {
        serde_json::from_str(EMBEDDED).expect("embedded constants file is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Constants from `$COLLAPSE_LAB_CONSTANTS` when set, otherwise the embedded file.
    pub fn load() -> Result<Self> {
        match std::env::var_os(CONSTANTS_ENV) {
            Some(p) => Self::from_file(Path::new(&p)),
            None => Ok(Self::codata()),
        }
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("m0", self.m0),
            ("g", self.g),
            ("k_b", self.k_b),
            ("e", self.e),
            ("eps0", self.eps0),
            ("c", self.c),
            ("sigma_sb", self.sigma_sb),
            ("year", self.year),
            ("kev", self.kev),
        ];
        let bad: Vec<String> = fields
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v >= 0.0))
            .map(|(k, v)| format!("{k} must be finite and non-negative (got {v})"))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Violations(bad))
        }
    }

    /// Copy with the Newton constant replaced; used for scaling checks.
    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}
