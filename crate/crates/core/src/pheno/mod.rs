// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form experimental predictions: interferometric decay, heating, cold-atom
//! diffusion, optomechanical spectra, photon emission and dissipative-model parameters.

mod dissipative;
mod interference;
mod noninterf;
mod series;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dissipative::{
    dissipative_csl, dissipative_dp, i_function, linear_friction_spectrum, DissipativeCsl, DissipativeDp, FrictionModel,
    IForm,
};
pub use interference::{free_density_1d, interference_decay, interference_exponent, FreeDensityPattern, TwoPacketSource};
pub use noninterf::{
    coldatom_spread, dp_photon_rate, heating_power, lambda_eff, optomech_psd, photon_rate, x2t3_extra_variance,
    ColdAtom, OptoTerm, OptomechSystem, PhotonRate, PsdVariant,
};

/// Lower edge of the photon-rate validity window (keV).
pub const PHOTON_WINDOW_MIN_KEV: f64 = 10.0;
/// Upper edge of the photon-rate validity window (keV).
pub const PHOTON_WINDOW_MAX_KEV: f64 = 1e5;

/// Collapse rate `lambda` (1/s) and correlation length `r_c` (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CslParams {
    pub lambda: f64,
    pub r_c: f64,
}

impl CslParams {
    pub fn new(lambda: f64, r_c: f64) -> Result<Self> {
        let p = Self { lambda, r_c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.r_c > 0.0 && self.r_c.is_finite()) {
            return Err(Error::InvalidParameter(format!("r_C must be > 0, got {}", self.r_c)));
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }
}

/// Frequency spectrum `f~(omega)` of the collapse noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpectrum {
    White,
    /// `Omega^2 / (Omega^2 + omega^2)`, time correlation `(Omega/2) exp(-Omega |t|)`.
    Exponential { omega: f64 },
    /// Linear interpolation in `|omega|`, held constant beyond the table.
    Tabulated { omega: Vec<f64>, value: Vec<f64> },
}

impl NoiseSpectrum {
    pub fn exponential(omega: f64) -> Result<Self> {
        let s = NoiseSpectrum::Exponential { omega };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseSpectrum::White => Ok(()),
            NoiseSpectrum::Exponential { omega } => {
                if *omega > 0.0 && omega.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("cut-off frequency must be > 0, got {omega}")))
                }
            }
            NoiseSpectrum::Tabulated { omega, value } => {
                if omega.len() != value.len() || omega.len() < 2 {
                    return Err(Error::InvalidParameter(
                        "tabulated spectrum needs matching omega/value columns with at least two rows".into(),
                    ));
                }
                if omega.windows(2).any(|w| !(w[1] > w[0])) || omega[0] < 0.0 {
                    return Err(Error::InvalidParameter(
                        "tabulated frequencies must be non-negative and strictly increasing".into(),
                    ));
                }
                if value.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::InvalidParameter("tabulated spectrum must be finite and >= 0".into()));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match self {
            NoiseSpectrum::White => 1.0,
            NoiseSpectrum::Exponential { omega: c } => {
                let r = w / c;
                1.0 / (1.0 + r * r)
            }
            NoiseSpectrum::Tabulated { omega, value } => interpolate(omega, value, w),
        }
    }

    /// `int_0^s f(u) du`.
    pub fn weight_up_to(&self, s: f64) -> Result<f64> {
        match self {
            NoiseSpectrum::White => Ok(0.5),
            NoiseSpectrum::Exponential { omega } => Ok(-0.5 * (-omega * s).exp_m1()),
            NoiseSpectrum::Tabulated { .. } => Err(time_domain_missing()),
        }
    }

    /// `tau_bar = int_0^t s f(s) ds`.
    pub fn tau_bar(&self, t: f64) -> Result<f64> {
        match self {
            NoiseSpectrum::White => Ok(0.0),
            NoiseSpectrum::Exponential { omega } => {
                let x = omega * t;
                let g = if x < 1e-3 {
                    x * x * (0.5 - x / 3.0 + x * x / 8.0)
                } else {
                    -(-x).exp_m1() - x * (-x).exp()
                };
                Ok(g / (2.0 * omega))
            }
            NoiseSpectrum::Tabulated { .. } => Err(time_domain_missing()),
        }
    }
}

fn time_domain_missing() -> Error {
    Error::InvalidParameter("a tabulated spectrum carries no time-domain correlation".into())
}

pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|v| *v <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Which member of the model family a prediction refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum Variant {
    White,
    Colored { spectrum: NoiseSpectrum },
    Dissipative { chi: f64 },
}

impl Variant {
    pub fn validate(&self) -> Result<()> {
        match self {
            Variant::White => Ok(()),
            Variant::Colored { spectrum } => spectrum.validate(),
            Variant::Dissipative { chi } => check_chi(*chi),
        }
    }
}

pub(crate) fn check_chi(chi: f64) -> Result<()> {
    if chi >= 0.0 && chi.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("chi must be >= 0, got {chi}")))
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
    }
}
