// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 1D grid with hard walls: amplitudes vanish outside `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("grid needs n >= 2 points, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must satisfy x_min < x_max (got {x_min}, {x_max})"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Grid symmetric about the origin.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        if j == 0 {
            self.x_min
        } else if j + 1 == self.n {
            self.x_max
        } else {
            let k = 2 * j as i64 - (self.n as i64 - 1);
            self.center() + k as f64 * (self.half_span() / (self.n - 1) as f64)
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x_min + self.x_max)
    }

    pub fn half_span(&self) -> f64 {
        0.5 * (self.x_max - self.x_min)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx()).round();
        j.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Fails when `dx` exceeds `length / 2`.
    pub fn require_resolution(&self, length: f64) -> Result<()> {
        let limit = 0.5 * length;
        if self.dx() > limit {
            Err(Error::GridTooCoarse { dx: self.dx(), limit })
        } else {
            Ok(())
        }
    }

    /// Fails unless the grid extends at least `margin` on each side of its center.
    pub fn require_half_span(&self, margin: f64) -> Result<()> {
        if self.half_span() < margin {
            Err(Error::InsufficientMargin {
                margin: self.half_span(),
                required: margin,
            })
        } else {
            Ok(())
        }
    }
}

/// Normalized 1D Gaussian `g(x - x_c) = exp(-(x - x_c)^2 / 2 r_C^2) / (sqrt(2 pi) r_C)`
/// centered on the grid center.
pub fn gaussian_smear(grid: &Grid1D, r_c: f64) -> Result<Vec<f64>> {
    if !(r_c > 0.0) {
        return Err(Error::InvalidParameter(format!("r_C must be positive, got {r_c}")));
    }
    grid.require_resolution(r_c)?;
    grid.require_half_span(8.0 * r_c)?;
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * r_c);
    let half = 0.5 * grid.dx();
    let n1 = grid.len() as i64 - 1;
    Ok((0..grid.len())
        .map(|j| {
            let u = (2 * j as i64 - n1) as f64 * half;
            norm * (-u * u / (2.0 * r_c * r_c)).exp()
        })
        .collect())
}

/// Gaussian noise correlator `G(x - y) = exp(-(x - y)^2 / 4 r_C^2)`.
#[inline]
pub fn spatial_correlator(x: f64, y: f64, r_c: f64) -> f64 {
    let d = x - y;
    (-d * d / (4.0 * r_c * r_c)).exp()
}
