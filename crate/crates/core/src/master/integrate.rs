// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

/// One classical RK4 step of `drho/dt = f(t, rho)`.
pub fn rk4_step<F>(rho: &CMatrix, t: f64, dt: f64, f: &mut F) -> Result<CMatrix>
where
    F: FnMut(f64, &CMatrix) -> Result<CMatrix>,
{
    let h = c(dt);
    let half = c(0.5 * dt);
    let k1 = f(t, rho)?;
    let k2 = f(t + 0.5 * dt, &(rho + &k1 * half))?;
    let k3 = f(t + 0.5 * dt, &(rho + &k2 * half))?;
    let k4 = f(t + dt, &(rho + &k3 * h))?;
    Ok(rho + (k1 + (k2 + k3) * c(2.0) + k4) * c(dt / 6.0))
}

/// Fixed-step RK4 driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rk4 {
    pub dt: f64,
}

impl Rk4 {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be > 0, got {dt}")));
        }
        Ok(Self { dt })
    }

    /// Step with `max_rate * dt <= 1e-2` and at least `min_steps` steps over `duration`.
    pub fn for_rate(max_rate: f64, duration: f64, min_steps: usize) -> Result<Self> {
        let n = ((max_rate * duration / 1e-2).ceil() as usize).max(min_steps).max(1);
        Self::new(duration / n as f64)
    }

    /// Integrates from `0` to `duration`, calling `observe(t, rho)` at `t = 0` and after every
    /// step. The last step is shortened to land exactly on `duration`.
    pub fn evolve<F, O>(&self, rho0: &CMatrix, duration: f64, mut f: F, mut observe: O) -> Result<CMatrix>
    where
        F: FnMut(f64, &CMatrix) -> Result<CMatrix>,
        O: FnMut(f64, &CMatrix),
    {
        let mut rho = rho0.clone();
        let mut t = 0.0;
        observe(t, &rho);
        let n = (duration / self.dt - 1e-9).ceil().max(0.0) as usize;
        for k in 0..n {
            let next = if k + 1 == n { duration } else { (k + 1) as f64 * self.dt };
            rho = rk4_step(&rho, t, next - t, &mut f)?;
            t = next;
            observe(t, &rho);
        }
        Ok(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let rho0 = CMatrix::from_element(1, 1, c(1.0));
        let err = |dt: f64| {
            let out = Rk4::new(dt).unwrap().evolve(&rho0, 1.0, |_, r| Ok(r * c(-1.0)), |_, _| {}).unwrap();
            (out[(0, 0)].re - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "{ratio}");
    }

    #[test]
    fn lands_on_duration() {
        let rho0 = CMatrix::from_element(1, 1, c(0.0));
        let mut last = 0.0;
        Rk4::new(0.3).unwrap().evolve(&rho0, 1.0, |_, r| Ok(r.clone()), |t, _| last = t).unwrap();
        assert_eq!(last, 1.0);
    }
}
