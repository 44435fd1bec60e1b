// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("grid too coarse: dx = {dx:e} exceeds {limit:e}")]
    GridTooCoarse { dx: f64, limit: f64 },

    #[error("grid margin {margin:e} m is below the required {required:e} m")]
    InsufficientMargin { margin: f64, required: f64 },

    #[error("position {0:e} lies outside the grid")]
    OutsideGrid(f64),

    #[error("state is not normalized (norm^2 = {0})")]
    Unnormalized(f64),

    #[error("localization produced a vanishing norm ({0:e})")]
    VanishingNorm(f64),

    #[error("step too large: pre-renormalization norm deviates from 1 by {0:e}")]
    StepTooLarge(f64),

    #[error("covariance matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("operator is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("collapse operators do not commute (residual {0:e})")]
    NonCommuting(f64),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("divergent self-energy: point-like mass density requires a cut-off length")]
    DivergentSelfEnergy,

    #[error("divergent value: {0}")]
    Divergence(String),

    #[error("prediction is not monotone in the collapse rate: {0}")]
    NonMonotone(String),

    #[error("prediction outside its validity window: {0}")]
    OutOfValidity(String),

    #[error("root not bracketed on [{lo:e}, {hi:e}]")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("trajectory {index}: {source}")]
    Trajectory {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration violations: {}", .0.join("; "))]
    Violations(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end: 2 for configuration
    /// problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Violations(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
