// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::series::phi1;
use super::{check_chi, check_positive, CslParams};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Dissipative CSL record for a particle of mass `mass`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipativeCsl {
    pub chi: f64,
    pub mass: f64,
    /// Noise temperature (K); infinite when `chi = 0`.
    pub temperature: f64,
    /// Constant term of `dE/dt` (W).
    pub heating_rate: f64,
    /// Relaxation rate of the kinetic energy (1/s).
    pub relaxation_rate: f64,
}

pub fn dissipative_csl(mass: f64, params: &CslParams, chi: f64, consts: &PhysicalConstants) -> Result<DissipativeCsl> {
    check_positive("mass", mass)?;
    params.validate()?;
    check_chi(chi)?;
    let hbar2 = consts.hbar * consts.hbar;
    let r2 = params.r_c * params.r_c;
    let m02 = consts.m0 * consts.m0;
    let damp = (1.0 + chi).powi(5);
    let temperature = if chi == 0.0 {
        f64::INFINITY
    } else {
        hbar2 / (8.0 * consts.k_b * r2 * mass * chi)
    };
    Ok(DissipativeCsl {
        chi,
        mass,
        temperature,
        heating_rate: 3.0 * hbar2 * params.lambda * mass / (4.0 * damp * r2 * m02),
        relaxation_rate: 4.0 * chi * params.lambda * mass * mass / (damp * m02),
    })
}

impl DissipativeCsl {
    /// `dE/dt` at kinetic energy `e`.
    pub fn energy_rate(&self, e: f64) -> f64 {
        self.heating_rate - self.relaxation_rate * e
    }

    /// Mean kinetic energy at time `t` from `e0`.
    pub fn energy_at(&self, e0: f64, t: f64) -> f64 {
        e0 + self.energy_rate(e0) * t * phi1(self.relaxation_rate * t)
    }

    /// Fixed point of the energy equation; infinite without dissipation.
    pub fn steady_energy(&self) -> f64 {
        if self.relaxation_rate == 0.0 {
            f64::INFINITY
        } else {
            self.heating_rate / self.relaxation_rate
        }
    }
}

/// Form of the dissipative DP integral `I(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IForm {
    /// `sqrt(pi) erf(x) + (e^{-x^2} - 3)/x + 2 (1 - e^{-x^2}) / x^2`.
    #[default]
    Printed,
    /// Last term `2 (1 - e^{-x^2}) / x^3`, which makes `I` vanish as `x^3/6` at the origin.
    Corrected,
}

pub fn i_function(x: f64, form: IForm) -> Result<f64> {
    check_positive("x", x)?;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let e = (-x * x).exp();
    let one_minus = -(-x * x).exp_m1();
    Ok(match form {
        IForm::Printed => sqrt_pi * libm::erf(x) + (e - 3.0) / x + 2.0 * one_minus / (x * x),
        IForm::Corrected if x < 0.5 => {
            // sum_n (-1)^n [2/(n!(2n+1)) - 1/(n+1)! - 2/(n+2)!] x^{2n+1}
            let mut sum = 0.0;
            let mut fact = 1.0;
            let mut pow = x;
            let x2 = x * x;
            for n in 0..30 {
                let nf = n as f64;
                if n > 0 {
                    fact *= nf;
                }
                let c = 2.0 / (fact * (2.0 * nf + 1.0)) - 1.0 / (fact * (nf + 1.0)) - 2.0 / (fact * (nf + 1.0) * (nf + 2.0));
                sum += if n % 2 == 0 { c } else { -c } * pow;
                pow *= x2;
            }
            sum
        }
        IForm::Corrected => sqrt_pi * libm::erf(x) + (e - 3.0) / x + 2.0 * one_minus / (x * x * x),
    })
}

/// Dissipative DP record for a homogeneous sphere, with `chi = m0 / m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipativeDp {
    pub chi: f64,
    pub temperature: f64,
    pub eta: f64,
    pub gamma: f64,
}

pub fn dissipative_dp(mass: f64, radius: f64, r0: f64, form: IForm, consts: &PhysicalConstants) -> Result<DissipativeDp> {
    check_positive("mass", mass)?;
    check_positive("radius", radius)?;
    check_positive("R0", r0)?;
    let chi = consts.m0 / mass;
    let temperature = consts.hbar * consts.hbar / (8.0 * consts.k_b * consts.m0 * r0 * r0);
    let x = radius / (r0 * (1.0 + chi));
    let eta = consts.g * mass * mass / (std::f64::consts::PI.sqrt() * radius.powi(3)) * i_function(x, form)?;
    let gamma = 4.0 * eta * r0 * r0 * chi * (1.0 + chi) * consts.m0 / mass;
    Ok(DissipativeDp {
        chi,
        temperature,
        eta,
        gamma,
    })
}

/// Noise-correlation model entering the linear-friction collapse operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrictionModel {
    Csl { lambda: f64, r_c: f64 },
    Dp { r0: f64 },
}

/// Fourier transform `D~_q` of the noise correlation at wavenumber `q` (1/m).
pub fn linear_friction_spectrum(q: f64, model: &FrictionModel, consts: &PhysicalConstants) -> Result<f64> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must be >= 0, got {q}")));
    }
    let pi = std::f64::consts::PI;
    match *model {
        FrictionModel::Csl { lambda, r_c } => {
            CslParams::new(lambda, r_c)?;
            Ok(lambda * (4.0 * pi * r_c * r_c).powf(1.5) * consts.hbar * consts.hbar * (-r_c * r_c * q * q).exp()
                / (consts.m0 * consts.m0))
        }
        FrictionModel::Dp { r0 } => {
            check_positive("R0", r0)?;
            if q == 0.0 {
                return Err(Error::Divergence("DP noise spectrum diverges at q = 0".into()));
            }
            Ok(4.0 * pi * consts.hbar * consts.g * (-r0 * r0 * q * q).exp() / (q * q))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::codata()
    }

    #[test]
    fn steady_state_is_three_halves_noise_temperature() {
        let c = consts();
        let p = CslParams::new(1e-8, 1e-7).unwrap();
        let m = 87.0 * c.m0;
        let d = dissipative_csl(m, &p, 1e-3, &c).unwrap();
        let e_inf = d.steady_energy();
        assert!(d.energy_rate(e_inf).abs() <= 1e-12 * d.heating_rate);
        assert!((e_inf / (1.5 * c.k_b * d.temperature) - 1.0).abs() < 1e-12);
        assert!((d.energy_at(0.0, 1e30) / e_inf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_dissipation_means_linear_heating() {
        let c = consts();
        let p = CslParams::new(1e-8, 1e-7).unwrap();
        let m = 1e-15;
        let d = dissipative_csl(m, &p, 0.0, &c).unwrap();
        assert!(d.temperature.is_infinite());
        let slope = 3.0 * c.hbar * c.hbar * p.lambda * m / (4.0 * p.r_c * p.r_c * c.m0 * c.m0);
        assert!((d.energy_at(2.0, 3.0) - (2.0 + 3.0 * slope)).abs() < 1e-15);
    }

    #[test]
    fn temperature_invariant() {
        let c = consts();
        let p = CslParams::new(1e-8, 1e-7).unwrap();
        let a = dissipative_csl(1e-20, &p, 0.1, &c).unwrap();
        let b = dissipative_csl(3e-19, &p, 0.02, &c).unwrap();
        let inv = |d: &DissipativeCsl| d.temperature * d.chi * d.mass;
        assert!((inv(&a) / inv(&b) - 1.0).abs() < 1e-14);
        assert!((inv(&a) - c.hbar * c.hbar / (8.0 * c.k_b * 1e-14)).abs() < 1e-12 * inv(&a));
    }

    #[test]
    fn i_function_limits() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        for form in [IForm::Printed, IForm::Corrected] {
            let far = i_function(1e9, form).unwrap();
            assert!((far - sqrt_pi).abs() < 1e-8);
            let x = 50.0;
            assert!((i_function(x, form).unwrap() - (sqrt_pi - 3.0 / x)).abs() < 1e-3);
        }
        let small = i_function(0.01, IForm::Corrected).unwrap();
        assert!((small / (1e-6 / 6.0) - 1.0).abs() < 1e-3);
        assert!(i_function(0.1, IForm::Printed).unwrap() < 0.0);
        let x: f64 = 0.49;
        let direct = sqrt_pi * libm::erf(x) + ((-x * x).exp() - 3.0) / x + 2.0 * (1.0 - (-x * x).exp()) / x.powi(3);
        let series = i_function(x, IForm::Corrected).unwrap();
        assert!((series / direct - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dp_record() {
        let c = consts();
        let d = dissipative_dp(1e-15, 1e-6, 1e-7, IForm::Printed, &c).unwrap();
        assert!((d.chi - c.m0 / 1e-15).abs() < 1e-30);
        assert!((d.temperature - c.hbar * c.hbar / (8.0 * c.k_b * c.m0 * 1e-14)).abs() < 1e-12 * d.temperature);
        assert!(d.eta > 0.0 && d.gamma > 0.0);
    }

    #[test]
    fn friction_spectra() {
        let c = consts();
        let csl = FrictionModel::Csl { lambda: 1e-8, r_c: 1e-7 };
        let at0 = linear_friction_spectrum(0.0, &csl, &c).unwrap();
        let expected = 1e-8 * (4.0 * std::f64::consts::PI * 1e-14_f64).powf(1.5) * c.hbar * c.hbar / (c.m0 * c.m0);
        assert!((at0 / expected - 1.0).abs() < 1e-14);
        let dp = FrictionModel::Dp { r0: 1e-9 };
        assert!(matches!(linear_friction_spectrum(0.0, &dp, &c), Err(Error::Divergence(_))));
        let near = 1e-3 / 1e-9;
        let ratio = linear_friction_spectrum(1.0 / 1e-9, &dp, &c).unwrap() / linear_friction_spectrum(near, &dp, &c).unwrap();
        let analytic = (-1.0_f64).exp() / (-1e-6_f64).exp() * 1e-6;
        assert!((ratio / analytic - 1.0).abs() < 1e-10);
        let mut prev = f64::INFINITY;
        for i in 1..50 {
            let v = linear_friction_spectrum(i as f64 * 1e8, &dp, &c).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
