// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::series::{dissipative_kernel, divided_phi1_plus_half, phi1};
use super::{check_chi, check_positive, interpolate, CslParams, NoiseSpectrum, Variant};
use super::{PHOTON_WINDOW_MAX_KEV, PHOTON_WINDOW_MIN_KEV};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_pieces, QuadOptions};

/// `lambda` replaced by its phonon-filtered value for a colored spectrum with linear
/// acoustic dispersion `omega_L(q) = c_s q`.
pub fn lambda_eff(params: &CslParams, spectrum: &NoiseSpectrum, sound_speed: Option<f64>) -> Result<f64> {
    params.validate()?;
    spectrum.validate()?;
    if matches!(spectrum, NoiseSpectrum::White) || params.lambda == 0.0 {
        return Ok(params.lambda);
    }
    let cs = sound_speed
        .ok_or_else(|| Error::InvalidParameter("colored heating needs a phonon sound speed".into()))?;
    check_positive("sound speed", cs)?;
    let scale = cs / params.r_c;
    let g = |u: f64| u.powi(4) * (-u * u).exp() * spectrum.value(scale * u);
    let moment = integrate(g, 0.0, 12.0, QuadOptions::rel(1e-13))?.value;
    Ok(params.lambda * 8.0 / (3.0 * std::f64::consts::PI.sqrt()) * moment)
}

/// Collapse heating power (W) of a body of total mass `m_total`.
pub fn heating_power(
    m_total: f64,
    params: &CslParams,
    spectrum: &NoiseSpectrum,
    sound_speed: Option<f64>,
    consts: &PhysicalConstants,
) -> Result<f64> {
    check_positive("mass", m_total)?;
    let lambda = lambda_eff(params, spectrum, sound_speed)?;
    Ok(0.75 * consts.hbar * consts.hbar * lambda * m_total / (consts.m0 * consts.m0 * params.r_c * params.r_c))
}

/// Free atom with its initial second moments (3D totals).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColdAtom {
    pub mass: f64,
    #[serde(default)]
    pub x2: f64,
    #[serde(default)]
    pub p2: f64,
    /// `<{x, p}>` at t = 0.
    #[serde(default)]
    pub xp: f64,
}

impl ColdAtom {
    pub fn at_rest(mass: f64) -> Self {
        Self {
            mass,
            x2: 0.0,
            p2: 0.0,
            xp: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        check_positive("atom mass", self.mass)?;
        if self.x2 < 0.0 || self.p2 < 0.0 || !self.xp.is_finite() {
            return Err(Error::InvalidParameter("initial moments must be finite, <x^2>, <p^2> >= 0".into()));
        }
        Ok(())
    }

    /// Collapse-free `<x^2>_t`.
    pub fn qm_variance(&self, t: f64) -> f64 {
        self.x2 + self.xp * t / self.mass + self.p2 * t * t / (self.mass * self.mass)
    }

    /// Nucleon number `m / m0`.
    pub fn nucleons(&self, consts: &PhysicalConstants) -> f64 {
        self.mass / consts.m0
    }
}

/// `lambda hbar^2 t^3 / (2 m0^2 r_C^2)`.
pub fn x2t3_extra_variance(t: f64, params: &CslParams, consts: &PhysicalConstants) -> f64 {
    params.lambda * consts.hbar * consts.hbar * t.powi(3) / (2.0 * consts.m0 * consts.m0 * params.r_c * params.r_c)
}

/// Extra position variance (m^2) of a free cold atom over the collapse-free evolution.
pub fn coldatom_spread(
    t: f64,
    params: &CslParams,
    variant: &Variant,
    atom: &ColdAtom,
    consts: &PhysicalConstants,
) -> Result<f64> {
    params.validate()?;
    variant.validate()?;
    atom.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let hbar = consts.hbar;
    let r = params.r_c;
    let a = atom.nucleons(consts);
    let m = atom.mass;
    match variant {
        Variant::White => Ok(x2t3_extra_variance(t, params, consts)),
        Variant::Colored { spectrum } => {
            let pre = 3.0 * params.lambda * a * a * hbar * hbar / (m * m * r * r);
            if pre == 0.0 {
                return Ok(0.0);
            }
            let mut pts = vec![0.0, t];
            if let NoiseSpectrum::Exponential { omega } = spectrum {
                for n in [1.0, 10.0, 50.0] {
                    let s = n / omega;
                    if s < t {
                        pts.push(s);
                    }
                }
            }
            pts.sort_by(f64::total_cmp);
            spectrum.weight_up_to(t)?;
            let g = |s: f64| (t + s) * (t + s) * spectrum.weight_up_to(s).unwrap_or(0.0);
            let v = integrate_pieces(&g, &pts, QuadOptions::rel(1e-12))?.value;
            Ok(pre * v)
        }
        Variant::Dissipative { chi } => {
            check_chi(*chi)?;
            let chi = *chi;
            let lam_a2 = params.lambda * a * a;
            let c = 4.0 * chi * lam_a2 / (1.0 + chi).powi(5);
            let b = 0.5 * (1.0 + chi) * c;
            // <p^2>_as C, finite as chi -> 0
            let pas_c = 1.5 * hbar * hbar * lam_a2 / (r * r * (1.0 + chi).powi(5));
            let diffusion = 6.0 * lam_a2 * r * r * chi * chi / (1.0 + chi).powi(3);
            let (bt, ct) = (b * t, c * t);
            let m2 = m * m;
            let extra = -2.0 * atom.p2 * t * t / m2 * divided_phi1_plus_half(bt, ct)
                + atom.xp * t / m * (phi1(bt) - 1.0)
                + diffusion * t
                + 2.0 * pas_c * t.powi(3) / m2 * dissipative_kernel(bt, ct);
            Ok(extra)
        }
    }
}

/// Optical contribution to a displacement spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptoTerm {
    Zero,
    Constant { value: f64 },
    Tabulated { omega: Vec<f64>, value: Vec<f64> },
}

impl OptoTerm {
    fn validate(&self) -> Result<()> {
        match self {
            OptoTerm::Zero => Ok(()),
            OptoTerm::Constant { value } if *value >= 0.0 && value.is_finite() => Ok(()),
            OptoTerm::Constant { value } => Err(Error::InvalidParameter(format!("S_opto must be >= 0, got {value}"))),
            OptoTerm::Tabulated { omega, value } => NoiseSpectrum::Tabulated {
                omega: omega.clone(),
                value: value.clone(),
            }
            .validate(),
        }
    }

    pub fn value(&self, omega: f64) -> f64 {
        match self {
            OptoTerm::Zero => 0.0,
            OptoTerm::Constant { value } => *value,
            OptoTerm::Tabulated { omega: w, value } => interpolate(w, value, omega.abs()),
        }
    }
}

/// Mechanical resonator read out optically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptomechSystem {
    pub mass: f64,
    pub gamma_m: f64,
    pub temperature: f64,
    pub omega_eff: f64,
    pub gamma_eff: f64,
    #[serde(default = "zero_opto")]
    pub s_opto: OptoTerm,
}

fn zero_opto() -> OptoTerm {
    OptoTerm::Zero
}

impl OptomechSystem {
    pub fn validate(&self) -> Result<()> {
        check_positive("mass", self.mass)?;
        check_positive("gamma_m", self.gamma_m)?;
        check_positive("temperature", self.temperature)?;
        check_positive("omega_eff", self.omega_eff)?;
        check_positive("gamma_eff", self.gamma_eff)?;
        self.s_opto.validate()
    }
}

/// Collapse contribution to the displacement spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsdVariant {
    White,
    Colored { spectrum: NoiseSpectrum },
    /// `eta_dcsl` is the diffusion constant evaluated at `r_C (1 + chi)`.
    Dissipative { chi: f64, eta_dcsl: f64 },
}

fn x_coth_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// Displacement power spectral density at angular frequency `omega`; `eta` is the
/// diffusion-tensor component along the readout axis.
pub fn optomech_psd(
    omega: f64,
    system: &OptomechSystem,
    params: &CslParams,
    variant: &PsdVariant,
    eta: f64,
    consts: &PhysicalConstants,
) -> Result<f64> {
    system.validate()?;
    params.validate()?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
    }
    let hbar = consts.hbar;
    let m = system.mass;
    let s_cm = hbar * hbar * eta;
    let (collapse, gamma) = match variant {
        PsdVariant::White => (s_cm, system.gamma_eff),
        PsdVariant::Colored { spectrum } => {
            spectrum.validate()?;
            (s_cm * spectrum.value(omega), system.gamma_eff)
        }
        PsdVariant::Dissipative { chi, eta_dcsl } => {
            check_chi(*chi)?;
            let chi = *chi;
            let factor = 1.0 + chi * chi * m * m * (system.gamma_m * system.gamma_m + omega * omega);
            let gamma_csl = eta_dcsl * 4.0 * params.r_c * params.r_c * consts.m0 * chi * (1.0 + chi) / m;
            (s_cm * factor, system.gamma_eff + gamma_csl)
        }
    };
    let x = hbar * omega / (2.0 * consts.k_b * system.temperature);
    let thermal = 2.0 * consts.k_b * system.temperature * m * system.gamma_m * x_coth_x(x);
    let detune = system.omega_eff * system.omega_eff - omega * omega;
    let denom = m * m * (detune * detune + gamma * gamma * omega * omega);
    Ok(system.s_opto.value(omega) + (thermal + collapse) / denom)
}

/// Photon emission rate per unit energy, with its validity flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonRate {
    /// J^-1 s^-1.
    pub rate: f64,
    pub in_window: bool,
}

fn photon_checks(energy: f64, atomic_number: f64, consts: &PhysicalConstants) -> Result<bool> {
    check_positive("photon energy", energy)?;
    if !(atomic_number >= 0.0 && atomic_number.is_finite()) {
        return Err(Error::InvalidParameter(format!("atomic number must be >= 0, got {atomic_number}")));
    }
    let kev = energy / consts.kev;
    Ok((PHOTON_WINDOW_MIN_KEV..=PHOTON_WINDOW_MAX_KEV).contains(&kev))
}

/// Spontaneous emission rate from one atom of atomic number `N_A` at photon energy `E` (J).
pub fn photon_rate(
    energy: f64,
    atomic_number: f64,
    params: &CslParams,
    spectrum: &NoiseSpectrum,
    consts: &PhysicalConstants,
) -> Result<PhotonRate> {
    params.validate()?;
    spectrum.validate()?;
    let in_window = photon_checks(energy, atomic_number, consts)?;
    let pi = std::f64::consts::PI;
    let na = atomic_number;
    let white = (na * na + na) * params.lambda * consts.hbar * consts.e * consts.e
        / (4.0 * pi * pi * consts.eps0 * consts.m0 * consts.m0 * params.r_c * params.r_c * consts.c.powi(3) * energy);
    Ok(PhotonRate {
        rate: white * spectrum.value(energy / consts.hbar),
        in_window,
    })
}

/// Diósi-Penrose counterpart of [`photon_rate`] with regularization length `r0`.
pub fn dp_photon_rate(energy: f64, atomic_number: f64, r0: f64, consts: &PhysicalConstants) -> Result<PhotonRate> {
    check_positive("R0", r0)?;
    let in_window = photon_checks(energy, atomic_number, consts)?;
    let na = atomic_number;
    let rate = (na * na + na) * consts.g * consts.e * consts.e
        / (12.0 * std::f64::consts::PI.powf(2.5) * consts.eps0 * consts.c.powi(3) * r0.powi(3) * energy);
    Ok(PhotonRate { rate, in_window })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::codata()
    }

    #[test]
    fn heating_anchor() {
        let c = consts();
        let p = CslParams::new(3.3e-11, 1e-7).unwrap();
        let per_kg = heating_power(1.0, &p, &NoiseSpectrum::White, None, &c).unwrap();
        assert!((per_kg / 1e-11 - 1.0).abs() < 0.02, "{per_kg}");
        assert_eq!(heating_power(1.0, &p.with_lambda(0.0), &NoiseSpectrum::White, None, &c).unwrap(), 0.0);
    }

    #[test]
    fn flat_table_leaves_lambda_unchanged() {
        let p = CslParams::new(1e-8, 1e-7).unwrap();
        let flat = NoiseSpectrum::Tabulated {
            omega: vec![0.0, 1.0],
            value: vec![1.0, 1.0],
        };
        let l = lambda_eff(&p, &flat, Some(5000.0)).unwrap();
        assert!((l / p.lambda - 1.0).abs() < 1e-6);
        assert!(lambda_eff(&p, &NoiseSpectrum::exponential(1e12).unwrap(), None).is_err());
        let cut = lambda_eff(&p, &NoiseSpectrum::exponential(1e9).unwrap(), Some(5000.0)).unwrap();
        assert!(cut < p.lambda);
    }

    #[test]
    fn coldatom_white_anchor() {
        let c = consts();
        let p = CslParams::new(5.1e-8, 1e-7).unwrap();
        let atom = ColdAtom::at_rest(87.0 * c.m0);
        let v = coldatom_spread(1.0, &p, &Variant::White, &atom, &c).unwrap();
        let oracle = 5.1e-8 * 1.054571817e-34_f64.powi(2) / (2.0 * 1.66053906660e-27_f64.powi(2) * 1e-14);
        assert!((v / oracle - 1.0).abs() < 1e-12);
        assert!((v - 1.0e-8).abs() < 0.05e-8);
    }

    #[test]
    fn colored_spread_white_kernel_is_seven_times_x2t3() {
        let c = consts();
        let p = CslParams::new(1e-8, 1e-7).unwrap();
        let atom = ColdAtom::at_rest(87.0 * c.m0);
        let v = coldatom_spread(
            2.0,
            &p,
            &Variant::Colored {
                spectrum: NoiseSpectrum::White,
            },
            &atom,
            &c,
        )
        .unwrap();
        let w = x2t3_extra_variance(2.0, &p, &c);
        assert!((v / w - 7.0).abs() < 1e-10);
    }

    #[test]
    fn dissipative_spread_reduces_and_is_continuous() {
        let c = consts();
        let p = CslParams::new(1e-8, 1e-7).unwrap();
        let atom = ColdAtom::at_rest(87.0 * c.m0);
        let w = coldatom_spread(1.0, &p, &Variant::White, &atom, &c).unwrap();
        let d0 = coldatom_spread(1.0, &p, &Variant::Dissipative { chi: 0.0 }, &atom, &c).unwrap();
        assert!((d0 / w - 1.0).abs() < 1e-12);
        let lo = coldatom_spread(1.0, &p, &Variant::Dissipative { chi: 1e-8 }, &atom, &c).unwrap();
        let hi = coldatom_spread(1.0, &p, &Variant::Dissipative { chi: 1e-4 }, &atom, &c).unwrap();
        assert!(lo.is_finite() && hi.is_finite());
        assert!((lo / hi - 1.0).abs() < 0.01);
    }

    #[test]
    fn dissipative_spread_matches_printed_form_where_stable() {
        let c = consts();
        let p = CslParams::new(1e3, 1e-7).unwrap();
        let atom = ColdAtom {
            mass: 87.0 * c.m0,
            x2: 1e-12,
            p2: 1e-58,
            xp: 1e-65,
        };
        let chi = 0.3;
        let t = 2e-7;
        let a = atom.mass / c.m0;
        let cc = 4.0 * chi * p.lambda * a * a / (1.0_f64 + chi).powi(5);
        let b = (1.0 + chi) * cc / 2.0;
        let pas = 3.0 * c.hbar * c.hbar / (8.0 * chi * p.r_c * p.r_c);
        let m = atom.mass;
        let printed = atom.x2
            + 2.0 * (atom.p2 - pas) / (m * m * (b - cc)) * ((1.0 - (-cc * t).exp()) / cc - (1.0 - (-b * t).exp()) / b)
            + (atom.xp - 2.0 * pas / (m * b)) * (1.0 - (-b * t).exp()) / (m * b)
            + (6.0 * p.lambda * a * a * p.r_c * p.r_c * chi * chi / (1.0_f64 + chi).powi(3) + 2.0 * pas / (m * m * b)) * t;
        let ours = atom.qm_variance(t)
            + coldatom_spread(t, &p, &Variant::Dissipative { chi }, &atom, &c).unwrap();
        assert!((ours / printed - 1.0).abs() < 1e-6, "{ours} {printed}");
    }

    #[test]
    fn psd_thermal_symmetry_and_dissipative_limit() {
        let c = consts();
        let sys = OptomechSystem {
            mass: 1e-12,
            gamma_m: 1e-3,
            temperature: 1.0,
            omega_eff: 2.0 * std::f64::consts::PI * 1e3,
            gamma_eff: 1e-2,
            s_opto: OptoTerm::Zero,
        };
        let p0 = CslParams::new(0.0, 1e-7).unwrap();
        let a = optomech_psd(5000.0, &sys, &p0, &PsdVariant::White, 0.0, &c).unwrap();
        let b = optomech_psd(-5000.0, &sys, &p0, &PsdVariant::White, 0.0, &c).unwrap();
        assert!((a / b - 1.0).abs() < 1e-14);
        let p = CslParams::new(1e-8, 1e-7).unwrap();
        let w = optomech_psd(5000.0, &sys, &p, &PsdVariant::White, 1e20, &c).unwrap();
        let d = optomech_psd(5000.0, &sys, &p, &PsdVariant::Dissipative { chi: 0.0, eta_dcsl: 1e20 }, 1e20, &c).unwrap();
        assert_eq!(w, d);
    }

    #[test]
    fn photon_rate_scaling_and_window() {
        let c = consts();
        let p = CslParams::new(4.9e-15, 1e-7).unwrap();
        let e = 100.0 * c.kev;
        let r1 = photon_rate(e, 32.0, &p, &NoiseSpectrum::White, &c).unwrap();
        let r2 = photon_rate(2.0 * e, 32.0, &p, &NoiseSpectrum::White, &c).unwrap();
        assert!((2.0 * r2.rate / r1.rate - 1.0).abs() < 1e-12);
        assert!(r1.in_window);
        assert!(!photon_rate(1.0 * c.kev, 32.0, &p, &NoiseSpectrum::White, &c).unwrap().in_window);
        assert!(photon_rate(0.0, 32.0, &p, &NoiseSpectrum::White, &c).is_err());
        let dp = dp_photon_rate(e, 32.0, 4.9e-10, &c).unwrap();
        let dp2 = dp_photon_rate(e, 32.0, 9.8e-10, &c).unwrap();
        assert!((dp.rate / dp2.rate - 8.0).abs() < 1e-12);
    }
}
