// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Experimental constraints, their inversion into upper bounds on `lambda` and lower
//! bounds on `R0`, and the assembly of exclusion grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::master::{csl_com_decay_rate, eta_tensor, MassDistribution};
use crate::pheno::{
    coldatom_spread, dp_photon_rate, heating_power, interference_exponent, photon_rate, ColdAtom, CslParams,
    NoiseSpectrum, Variant,
};

const DEFAULT_CONSTRAINTS: &str = include_str!("../data/default_constraints.json");

const LAMBDA_SEARCH: (f64, f64) = (1e-40, 1e20);
const R0_SEARCH: (f64, f64) = (1e-16, 1e-6);
const MONOTONE_SAMPLES: usize = 13;

/// Physical system probed by an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConstraintKind {
    /// Unexplained heating per unit mass (W/kg).
    Heating {
        #[serde(default)]
        sound_speed: Option<f64>,
    },
    /// Collapse heating of a body balanced against its blackbody emission (W).
    BlackbodyBalance {
        mass: f64,
        surface: f64,
        temperature: f64,
        #[serde(default)]
        sound_speed: Option<f64>,
    },
    /// Extra position variance of a free atom after `time` (m^2).
    Coldatom { atom: ColdAtom, time: f64 },
    /// Collapse force noise `hbar^2 eta_xx` on a mechanical body (N^2/Hz), optionally
    /// filtered at the analysis frequency `omega`.
    Optomech {
        body: MassDistribution,
        #[serde(default)]
        omega: f64,
        #[serde(default)]
        gamma_m: f64,
    },
    /// Spontaneous photon emission per atom (1/(J s)) at energy `energy_kev`.
    Photon { energy_kev: f64, atomic_number: f64 },
    /// Loss of interference `-ln F` for a static superposition of size `separation`.
    Interference { mass: f64, separation: f64, time: f64 },
    /// Spontaneous photon emission per atom in the Diósi-Penrose model.
    DpPhoton { energy_kev: f64, atomic_number: f64 },
}

impl ConstraintKind {
    pub fn units(&self) -> &'static str {
        match self {
            ConstraintKind::Heating { .. } => "W/kg",
            ConstraintKind::BlackbodyBalance { .. } => "W",
            ConstraintKind::Coldatom { .. } => "m^2",
            ConstraintKind::Optomech { .. } => "N^2/Hz",
            ConstraintKind::Photon { .. } | ConstraintKind::DpPhoton { .. } => "1/(J s)",
            ConstraintKind::Interference { .. } => "1",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConstraintKind::Heating { .. } => "heating",
            ConstraintKind::BlackbodyBalance { .. } => "blackbody-balance",
            ConstraintKind::Coldatom { .. } => "coldatom",
            ConstraintKind::Optomech { .. } => "optomech",
            ConstraintKind::Photon { .. } => "photon",
            ConstraintKind::Interference { .. } => "interference",
            ConstraintKind::DpPhoton { .. } => "dp-photon",
        }
    }

    fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        };
        match self {
            ConstraintKind::Heating { sound_speed } => sound_speed.map_or(Ok(()), |c| pos("sound_speed", c)),
            ConstraintKind::BlackbodyBalance {
                mass,
                surface,
                temperature,
                sound_speed,
            } => {
                pos("mass", *mass)?;
                pos("surface", *surface)?;
                pos("temperature", *temperature)?;
                sound_speed.map_or(Ok(()), |c| pos("sound_speed", c))
            }
            ConstraintKind::Coldatom { atom, time } => {
                pos("atom mass", atom.mass)?;
                pos("time", *time)
            }
            ConstraintKind::Optomech { body, omega, gamma_m } => {
                body.validate()?;
                if !(omega.is_finite() && *gamma_m >= 0.0) {
                    return Err(Error::InvalidParameter("omega must be finite and gamma_m >= 0".into()));
                }
                Ok(())
            }
            ConstraintKind::Photon {
                energy_kev,
                atomic_number,
            }
            | ConstraintKind::DpPhoton {
                energy_kev,
                atomic_number,
            } => {
                pos("energy_kev", *energy_kev)?;
                pos("atomic_number", *atomic_number)
            }
            ConstraintKind::Interference { mass, separation, time } => {
                pos("mass", *mass)?;
                pos("separation", *separation)?;
                pos("time", *time)
            }
        }
    }
}

/// Where a constraint's limit comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LimitSpec {
    /// A measured or quoted limit in the kind's units.
    Measured { value: f64 },
    /// Back-derived anchor: the prediction at a quoted bound `(lambda, r_c)`.
    BackDerived { lambda: f64, r_c: f64 },
    /// Back-derived anchor for the DP model at a quoted `r0`.
    BackDerivedR0 { r0: f64 },
    /// Radiated blackbody power `S sigma T^4` of the body itself.
    Radiated,
}

impl LimitSpec {
    pub fn is_back_derived(&self) -> bool {
        matches!(self, LimitSpec::BackDerived { .. } | LimitSpec::BackDerivedR0 { .. })
    }
}

fn white() -> Variant {
    Variant::White
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConstraint {
    pub id: String,
    pub system: ConstraintKind,
    pub limit: LimitSpec,
    #[serde(default = "white")]
    pub variant: Variant,
    #[serde(default)]
    pub note: String,
}

impl ExperimentConstraint {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidParameter("constraint id must be non-empty".into()));
        }
        self.system.validate()?;
        self.variant.validate()?;
        let dp = matches!(self.system, ConstraintKind::DpPhoton { .. });
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("constraint {}: {msg}", self.id)));
        match &self.limit {
            LimitSpec::Measured { value } if !(*value > 0.0 && value.is_finite()) => {
                bad("measured_limit must be > 0")
            }
            LimitSpec::BackDerived { .. } if dp => bad("dp-photon anchors are given by r0"),
            LimitSpec::BackDerived { lambda, r_c } => CslParams::new(*lambda, *r_c).map(|_| ()),
            LimitSpec::BackDerivedR0 { .. } if !dp => bad("r0 anchors apply to dp-photon only"),
            LimitSpec::BackDerivedR0 { r0 } if !(*r0 > 0.0) => bad("anchor r0 must be > 0"),
            LimitSpec::Radiated if !matches!(self.system, ConstraintKind::BlackbodyBalance { .. }) => {
                bad("a radiated limit needs a blackbody-balance system")
            }
            _ => Ok(()),
        }
    }

    pub fn is_dp(&self) -> bool {
        matches!(self.system, ConstraintKind::DpPhoton { .. })
    }

    /// The measured limit in the kind's units, resolving back-derived anchors.
    pub fn measured_limit(&self, consts: &PhysicalConstants) -> Result<f64> {
        self.validate()?;
        let v = match &self.limit {
            LimitSpec::Measured { value } => *value,
            LimitSpec::BackDerived { lambda, r_c } => predict(self, *lambda, *r_c, consts)?,
            LimitSpec::BackDerivedR0 { r0 } => predict_dp(self, *r0, consts)?,
            LimitSpec::Radiated => match self.system {
                ConstraintKind::BlackbodyBalance {
                    surface, temperature, ..
                } => surface * consts.sigma_sb * temperature.powi(4),
                _ => unreachable!("validated"),
            },
        };
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!("constraint {}: resolved limit {v} is not > 0", self.id)))
        }
    }
}

fn spectrum_of(variant: &Variant) -> NoiseSpectrum {
    match variant {
        Variant::Colored { spectrum } => spectrum.clone(),
        _ => NoiseSpectrum::White,
    }
}

/// Model prediction of a `(lambda, r_C)` constraint in its own units.
pub fn predict(c: &ExperimentConstraint, lambda: f64, r_c: f64, consts: &PhysicalConstants) -> Result<f64> {
    let params = CslParams::new(lambda, r_c)?;
    let variant = &c.variant;
    match &c.system {
        ConstraintKind::Heating { sound_speed } => {
            heating_power(1.0, &params, &spectrum_of(variant), *sound_speed, consts)
        }
        ConstraintKind::BlackbodyBalance { mass, sound_speed, .. } => {
            heating_power(*mass, &params, &spectrum_of(variant), *sound_speed, consts)
        }
        ConstraintKind::Coldatom { atom, time } => coldatom_spread(*time, &params, variant, atom, consts),
        ConstraintKind::Optomech { body, omega, gamma_m } => {
            let eta = eta_tensor(body, lambda, r_c, consts.m0)?.get(0, 0);
            let s = consts.hbar * consts.hbar * eta;
            Ok(match variant {
                Variant::White => s,
                Variant::Colored { spectrum } => s * spectrum.value(*omega),
                Variant::Dissipative { chi } => {
                    let m = body.total_mass();
                    s * (1.0 + chi * chi * m * m * (gamma_m * gamma_m + omega * omega))
                }
            })
        }
        ConstraintKind::Photon {
            energy_kev,
            atomic_number,
        } => {
            if matches!(variant, Variant::Dissipative { .. }) {
                return Err(Error::InvalidParameter("no dissipative photon-emission model".into()));
            }
            let r = photon_rate(energy_kev * consts.kev, *atomic_number, &params, &spectrum_of(variant), consts)?;
            if !r.in_window {
                return Err(Error::OutOfValidity(format!("photon energy {energy_kev} keV")));
            }
            Ok(r.rate)
        }
        ConstraintKind::Interference { mass, separation, time } => {
            interference_exponent([0.0; 3], [*separation, 0.0, 0.0], *time, *mass, &params, variant, consts)
        }
        ConstraintKind::DpPhoton { .. } => {
            Err(Error::InvalidParameter(format!("constraint {} bounds R0, not lambda", c.id)))
        }
    }
}

/// DP photon-emission prediction at regularization length `r0`.
pub fn predict_dp(c: &ExperimentConstraint, r0: f64, consts: &PhysicalConstants) -> Result<f64> {
    match c.system {
        ConstraintKind::DpPhoton {
            energy_kev,
            atomic_number,
        } => {
            let r = dp_photon_rate(energy_kev * consts.kev, atomic_number, r0, consts)?;
            if !r.in_window {
                return Err(Error::OutOfValidity(format!("photon energy {energy_kev} keV")));
            }
            Ok(r.rate)
        }
        _ => Err(Error::InvalidParameter(format!("constraint {} is not a dp-photon constraint", c.id))),
    }
}

fn is_linear(c: &ExperimentConstraint) -> bool {
    !matches!(
        (&c.system, &c.variant),
        (ConstraintKind::Coldatom { .. }, Variant::Dissipative { .. })
    )
}

fn log_bisect<F: Fn(f64) -> Result<f64>>(f: F, target: f64, lo: f64, hi: f64, increasing: bool) -> Result<f64> {
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let fa = f(lo)? - target;
    let fb = f(hi)? - target;
    if fa.signum() == fb.signum() {
        return Err(Error::NotBracketed { lo, hi });
    }
    for _ in 0..400 {
        let mid = 0.5 * (a + b);
        let v = f(mid.exp())? - target;
        if (v < 0.0) == increasing {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a) < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Largest `lambda` compatible with the constraint at `r_c`.
pub fn lambda_upper_bound(c: &ExperimentConstraint, r_c: f64, consts: &PhysicalConstants) -> Result<f64> {
    let limit = c.measured_limit(consts)?;
    if c.is_dp() {
        return Err(Error::InvalidParameter(format!("constraint {} bounds R0, not lambda", c.id)));
    }
    if is_linear(c) {
        let unit = predict(c, 1.0, r_c, consts)?;
        if !(unit > 0.0 && unit.is_finite()) {
            return Err(Error::NonMonotone(format!(
                "constraint {}: prediction per unit lambda is {unit:e} at r_C = {r_c:e}",
                c.id
            )));
        }
        return Ok(limit / unit);
    }
    let (lo, hi) = LAMBDA_SEARCH;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..MONOTONE_SAMPLES {
        let l = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (MONOTONE_SAMPLES - 1) as f64).exp();
        let v = predict(c, l, r_c, consts)?;
        if v < prev * (1.0 - 1e-12) {
            return Err(Error::NonMonotone(format!(
                "constraint {}: prediction decreases near lambda = {l:e} at r_C = {r_c:e}",
                c.id
            )));
        }
        prev = v;
    }
    log_bisect(|l| predict(c, l, r_c, consts), limit, lo, hi, true)
}

/// Astrophysical body for a heating-versus-radiation balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Body {
    pub mass: f64,
    pub surface: f64,
    pub temperature: f64,
}

/// `lambda_max = S sigma T^4 (4/3) m0^2 r_C^2 / (hbar^2 M)`.
pub fn blackbody_balance_bound(body: &Body, r_c: f64, consts: &PhysicalConstants) -> Result<f64> {
    for (n, v) in [
        ("mass", body.mass),
        ("surface", body.surface),
        ("temperature", body.temperature),
        ("r_C", r_c),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{n} must be > 0, got {v}")));
        }
    }
    let radiated = body.surface * consts.sigma_sb * body.temperature.powi(4);
    Ok(radiated * 4.0 / 3.0 * consts.m0 * consts.m0 * r_c * r_c / (consts.hbar * consts.hbar * body.mass))
}

/// CSL center-of-mass decoherence rate of a rigid body for a displacement `d`.
pub fn csl_decoherence_rate(
    distribution: &MassDistribution,
    d: f64,
    params: &CslParams,
    consts: &PhysicalConstants,
) -> Result<f64> {
    params.validate()?;
    csl_com_decay_rate(distribution, d, params.lambda, params.r_c, consts.m0)
}

/// Object that collapse must localize within `time` for the model to be acceptable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroscopicitySpec {
    pub diameter: f64,
    pub density: f64,
    pub separation: f64,
    pub time: f64,
}

impl Default for MacroscopicitySpec {
    fn default() -> Self {
        Self {
            diameter: 10e-6,
            density: 1000.0,
            separation: 10e-6,
            time: 0.01,
        }
    }
}

/// Smallest `lambda` for which the reference object decoheres within the reference time.
pub fn macroscopicity_lower_bound(r_c: f64, spec: &MacroscopicitySpec, consts: &PhysicalConstants) -> Result<f64> {
    let radius = 0.5 * spec.diameter;
    let mass = spec.density * 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
    let body = MassDistribution::sphere(radius, mass)?;
    let unit = csl_decoherence_rate(&body, spec.separation, &CslParams::new(1.0, r_c)?, consts)?;
    Ok(1.0 / (spec.time * unit))
}

/// Smallest `R0` compatible with a dp-photon constraint.
pub fn r0_lower_bound(c: &ExperimentConstraint, consts: &PhysicalConstants) -> Result<f64> {
    r0_lower_bound_on(c, R0_SEARCH.0, R0_SEARCH.1, consts)
}

pub fn r0_lower_bound_on(c: &ExperimentConstraint, lo: f64, hi: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !c.is_dp() {
        return Err(Error::InvalidParameter(format!("constraint {} is not a dp-photon constraint", c.id)));
    }
    let limit = c.measured_limit(consts)?;
    log_bisect(|r0| predict_dp(c, r0, consts), limit, lo, hi, false)
}

/// True when the constraint rules out regularization length `r0`.
pub fn dp_excludes(c: &ExperimentConstraint, r0: f64, consts: &PhysicalConstants) -> Result<bool> {
    Ok(predict_dp(c, r0, consts)? > c.measured_limit(consts)?)
}

/// Log-spaced `(r_C, lambda)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_c_min: f64,
    pub r_c_max: f64,
    pub r_c_points: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_c_min: 1e-9,
            r_c_max: 1e-3,
            r_c_points: 121,
            lambda_min: 1e-20,
            lambda_max: 1e-4,
            lambda_points: 161,
        }
    }
}

/// `n` log-spaced values from `lo` to `hi`, endpoints exact.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64),
        })
        .collect()
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.r_c_min > 0.0 && self.r_c_max > self.r_c_min) {
            bad.push("r_c range must satisfy 0 < r_c_min < r_c_max".to_string());
        }
        if !(self.lambda_min > 0.0 && self.lambda_max > self.lambda_min) {
            bad.push("lambda range must satisfy 0 < lambda_min < lambda_max".to_string());
        }
        if self.r_c_points < 2 || self.lambda_points < 2 {
            bad.push("grids need at least two points per axis".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Violations(bad))
        }
    }

    pub fn r_c_values(&self) -> Vec<f64> {
        log_space(self.r_c_min, self.r_c_max, self.r_c_points)
    }

    pub fn lambda_values(&self) -> Vec<f64> {
        log_space(self.lambda_min, self.lambda_max, self.lambda_points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Excluded,
    Allowed,
    NoData,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Excluded => "excluded",
            Verdict::Allowed => "allowed",
            Verdict::NoData => "no-data",
        }
    }
}

/// Per-column result: tightest available bound and the constraint providing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnBound {
    pub r_c: f64,
    pub lambda_max: Option<f64>,
    pub binding: Option<usize>,
    pub refused: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionGrid {
    pub constraint_ids: Vec<String>,
    pub r_c: Vec<f64>,
    pub lambda: Vec<f64>,
    pub columns: Vec<ColumnBound>,
    /// `verdict[i][j]` for `r_c[i]`, `lambda[j]`.
    pub verdict: Vec<Vec<Verdict>>,
}

impl ExclusionGrid {
    /// Binding constraint id for an excluded cell.
    pub fn binding_id(&self, i: usize, j: usize) -> Option<&str> {
        match self.verdict[i][j] {
            Verdict::Excluded => self.columns[i].binding.map(|k| self.constraint_ids[k].as_str()),
            _ => None,
        }
    }

    pub fn column_index(&self, r_c: f64) -> usize {
        let target = r_c.ln();
        (0..self.r_c.len())
            .min_by(|&a, &b| (self.r_c[a].ln() - target).abs().total_cmp(&(self.r_c[b].ln() - target).abs()))
            .unwrap_or(0)
    }
}

fn column(constraints: &[ExperimentConstraint], limits: &[Result<f64>], r_c: f64, consts: &PhysicalConstants) -> ColumnBound {
    let mut best: Option<(f64, usize)> = None;
    let mut refused = Vec::new();
    for (k, c) in constraints.iter().enumerate() {
        if c.is_dp() {
            continue;
        }
        let bound = match &limits[k] {
            Ok(limit) => lambda_upper_bound(c, r_c, consts).map(|l| (l, *limit)),
            Err(_) => Err(Error::InvalidParameter("unresolved limit".into())),
        };
        match bound {
            Ok((l, _)) if l.is_finite() && l > 0.0 => {
                if best.is_none_or(|(b, _)| l < b) {
                    best = Some((l, k));
                }
            }
            _ => refused.push(k),
        }
    }
    ColumnBound {
        r_c,
        lambda_max: best.map(|b| b.0),
        binding: best.map(|b| b.1),
        refused,
    }
}

/// Assemble the exclusion region of a constraint set; dp-photon constraints are ignored.
pub fn exclusion_region(
    constraints: &[ExperimentConstraint],
    grid: &GridSpec,
    consts: &PhysicalConstants,
) -> Result<ExclusionGrid> {
    grid.validate()?;
    if !constraints.iter().any(|c| !c.is_dp()) {
        return Err(Error::InvalidParameter("at least one (lambda, r_C) constraint is required".into()));
    }
    for c in constraints {
        c.validate()?;
    }
    let limits: Vec<Result<f64>> = constraints.iter().map(|c| c.measured_limit(consts)).collect();
    let r_values = grid.r_c_values();
    let lambda = grid.lambda_values();
    let columns: Vec<ColumnBound> = r_values
        .par_iter()
        .map(|&r| column(constraints, &limits, r, consts))
        .collect();
    let verdict = columns
        .iter()
        .map(|col| {
            lambda
                .iter()
                .map(|&l| match col.lambda_max {
                    Some(max) if l >= max => Verdict::Excluded,
                    _ if !col.refused.is_empty() => Verdict::NoData,
                    _ => Verdict::Allowed,
                })
                .collect()
        })
        .collect();
    Ok(ExclusionGrid {
        constraint_ids: constraints.iter().map(|c| c.id.clone()).collect(),
        r_c: r_values,
        lambda,
        columns,
        verdict,
    })
}

/// The built-in constraint suite.
pub fn default_constraints() -> Vec<ExperimentConstraint> {
    serde_json::from_str(DEFAULT_CONSTRAINTS).expect("embedded constraint suite is valid")
}

pub fn parse_constraints(text: &str) -> Result<Vec<ExperimentConstraint>> {
    let list: Vec<ExperimentConstraint> = serde_json::from_str(text)?;
    let mut ids = std::collections::HashSet::new();
    for c in &list {
        c.validate()?;
        if !ids.insert(c.id.as_str()) {
            return Err(Error::InvalidParameter(format!("duplicate constraint id {}", c.id)));
        }
    }
    Ok(list)
}
