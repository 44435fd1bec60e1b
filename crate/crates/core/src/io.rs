// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration, ensemble orchestration, CSV/JSON export and run manifests.
//!
//! A run is described by one JSON document ([`RunConfig`]). Every field outside the
//! required subcommand has a documented default, unknown keys are rejected, and the
//! whole document is checked before any computation starts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{
    default_constraints, exclusion_region, macroscopicity_lower_bound, predict, predict_dp, r0_lower_bound,
    ExperimentConstraint, ExclusionGrid, GridSpec, MacroscopicitySpec,
};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::grw::{grw_master_rhs_with, GridLocalizer, GrwParams, GrwSimulator, Localizer};
use crate::linalg::{c, CMatrix};
use crate::master::{csl_me_rhs, dp_me_rhs, MassDistribution, Rk4};
use crate::pheno::{free_density_1d, CslParams, TwoPacketSource, Variant};
use crate::quantum::{Grid1D, HermitianOperator, QuantumState, StateVector};
use crate::rng;
use crate::sde::{simulate_sde_trajectory, CollapseSdeModel, ObservableSeries, RunPlan, Scheme, TrajectoryRecord};
use crate::stats;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Trajectory,
    MasterEq,
    Predict,
    Bounds,
    Interference,
}

impl Subcommand {
    pub fn as_str(&self) -> &'static str {
        match self {
            Subcommand::Trajectory => "trajectory",
            Subcommand::MasterEq => "master-eq",
            Subcommand::Predict => "predict",
            Subcommand::Bounds => "bounds",
            Subcommand::Interference => "interference",
        }
    }

    fn section(&self) -> &'static str {
        match self {
            Subcommand::Trajectory => "trajectory",
            Subcommand::MasterEq => "master_eq",
            Subcommand::Predict => "predict",
            Subcommand::Bounds => "bounds",
            Subcommand::Interference => "interference",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("collapse-lab-out")
}

/// Where and how outputs are written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory, created if missing. Default `collapse-lab-out`.
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// Format of tabular outputs. Default `csv`.
    #[serde(default)]
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            format: Format::Csv,
        }
    }
}

/// Symmetric position grid `[-half_width, half_width]` with `points` nodes (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: 1.2e-6,
            points: 61,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid1D> {
        Grid1D::symmetric(self.half_width, self.points)
    }

    fn check(&self, path: &str, v: &mut Violations) {
        v.positive(path, "half_width", self.half_width);
        if self.points < 3 {
            v.push(format!("{path}.points: grid needs at least 3 points, got {}", self.points));
        }
    }
}

/// Equal-weight superposition of two Gaussian packets at `+-separation/2` (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub separation: f64,
    pub width: f64,
}

impl Default for PacketConfig {
    fn default() -> Self {
        Self {
            separation: 1e-6,
            width: 1e-7,
        }
    }
}

impl PacketConfig {
    fn check(&self, path: &str, v: &mut Violations) {
        v.positive(path, "separation", self.separation);
        v.positive(path, "width", self.width);
    }
}

fn one() -> f64 {
    1.0
}

fn default_theta() -> f64 {
    std::f64::consts::PI / 6.0
}

/// Stochastic model simulated by the `trajectory` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryModel {
    /// Two-level system, collapse operator `sigma_z`, `H = (omega/2) sigma_x`, `hbar = 1`.
    /// Initial state `cos(theta)|0> + sin(theta)|1>`. Defaults: `gamma = 1`, `theta = pi/6`,
    /// `omega = 0`.
    Spin {
        #[serde(default = "one")]
        gamma: f64,
        #[serde(default = "default_theta")]
        theta: f64,
        #[serde(default)]
        omega: f64,
    },
    /// CSL noise field on a grid for one particle of mass `mass` (SI units).
    Csl {
        lambda: f64,
        r_c: f64,
        mass: f64,
        #[serde(default)]
        grid: GridConfig,
        #[serde(default)]
        packets: PacketConfig,
    },
    /// Diósi noise field on a grid for one particle of mass `mass` (SI units).
    Diosi {
        r0: f64,
        mass: f64,
        #[serde(default)]
        grid: GridConfig,
        #[serde(default)]
        packets: PacketConfig,
    },
    /// GRW spontaneous localizations on a grid.
    Grw {
        lambda: f64,
        r_c: f64,
        #[serde(default)]
        grid: GridConfig,
        #[serde(default)]
        packets: PacketConfig,
    },
}

impl Default for TrajectoryModel {
    fn default() -> Self {
        TrajectoryModel::Spin {
            gamma: one(),
            theta: default_theta(),
            omega: 0.0,
        }
    }
}

fn default_ensemble() -> usize {
    200
}
fn default_duration() -> f64 {
    5.0
}
fn default_steps() -> usize {
    5000
}
fn default_record_every() -> usize {
    250
}
fn default_scheme() -> Scheme {
    Scheme::Ito
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    /// Default: the spin model.
    #[serde(default)]
    pub model: TrajectoryModel,
    /// Number of trajectories. Default 200.
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    /// Simulated time. Default 5.
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Fixed time steps over `duration` (ignored by GRW, which is event driven). Default 5000.
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Record observables every this many steps. Default 250.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// `ito` (collapse equation) or `imaginary_noise`. Default `ito`.
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Also export every trajectory. Default true.
    #[serde(default = "yes")]
    pub write_trajectories: bool,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            model: TrajectoryModel::default(),
            ensemble: default_ensemble(),
            duration: default_duration(),
            steps: default_steps(),
            record_every: default_record_every(),
            scheme: default_scheme(),
            write_trajectories: true,
        }
    }
}

impl TrajectoryConfig {
    fn check(&self, v: &mut Violations) {
        let p = "trajectory";
        match &self.model {
            TrajectoryModel::Spin { gamma, theta, omega } => {
                v.nonneg(p, "gamma", *gamma);
                v.finite(p, "theta", *theta);
                v.finite(p, "omega", *omega);
            }
            TrajectoryModel::Csl {
                lambda,
                r_c,
                mass,
                grid,
                packets,
            } => {
                v.lambda(p, *lambda);
                v.positive(p, "r_c", *r_c);
                v.positive(p, "mass", *mass);
                grid.check("trajectory.grid", v);
                packets.check("trajectory.packets", v);
            }
            TrajectoryModel::Diosi { r0, mass, grid, packets } => {
                v.positive(p, "r0", *r0);
                v.positive(p, "mass", *mass);
                grid.check("trajectory.grid", v);
                packets.check("trajectory.packets", v);
            }
            TrajectoryModel::Grw {
                lambda,
                r_c,
                grid,
                packets,
            } => {
                v.lambda(p, *lambda);
                v.positive(p, "r_c", *r_c);
                grid.check("trajectory.grid", v);
                packets.check("trajectory.packets", v);
            }
        }
        v.positive(p, "duration", self.duration);
        v.at_least_one(p, "steps", self.steps);
        v.at_least_one(p, "record_every", self.record_every);
    }

    pub fn plan(&self) -> Result<RunPlan> {
        RunPlan::new(self.duration / self.steps as f64, self.steps, self.record_every, false)
    }
}

/// Deterministic density-matrix model for the `master-eq` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum MasterModel {
    Grw { lambda: f64, r_c: f64 },
    Csl { lambda: f64, r_c: f64, mass: f64 },
    /// Point mass, or a homogeneous sphere when `radius` is given.
    Dp {
        r0: f64,
        mass: f64,
        #[serde(default)]
        radius: Option<f64>,
    },
}

impl Default for MasterModel {
    fn default() -> Self {
        MasterModel::Grw { lambda: 1.0, r_c: 1e-7 }
    }
}

fn default_me_steps() -> usize {
    1000
}
fn default_me_record() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MasterEqConfig {
    /// Default: GRW with `lambda = 1`, `r_c = 1e-7`.
    #[serde(default)]
    pub model: MasterModel,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub packets: PacketConfig,
    /// Default 1.
    #[serde(default = "one")]
    pub duration: f64,
    /// RK4 steps. Default 1000.
    #[serde(default = "default_me_steps")]
    pub steps: usize,
    /// Default 10.
    #[serde(default = "default_me_record")]
    pub record_every: usize,
}

impl Default for MasterEqConfig {
    fn default() -> Self {
        Self {
            model: MasterModel::default(),
            grid: GridConfig::default(),
            packets: PacketConfig::default(),
            duration: 1.0,
            steps: default_me_steps(),
            record_every: default_me_record(),
        }
    }
}

impl MasterEqConfig {
    fn check(&self, v: &mut Violations) {
        let p = "master_eq";
        match &self.model {
            MasterModel::Grw { lambda, r_c } => {
                v.lambda(p, *lambda);
                v.positive(p, "r_c", *r_c);
            }
            MasterModel::Csl { lambda, r_c, mass } => {
                v.lambda(p, *lambda);
                v.positive(p, "r_c", *r_c);
                v.positive(p, "mass", *mass);
            }
            MasterModel::Dp { r0, mass, radius } => {
                v.positive(p, "r0", *r0);
                v.positive(p, "mass", *mass);
                if let Some(r) = radius {
                    v.positive(p, "radius", *r);
                }
            }
        }
        self.grid.check("master_eq.grid", v);
        self.packets.check("master_eq.packets", v);
        v.positive(p, "duration", self.duration);
        v.at_least_one(p, "steps", self.steps);
        v.at_least_one(p, "record_every", self.record_every);
    }
}

fn default_predict_lambda() -> f64 {
    1e-16
}
fn default_r_c() -> f64 {
    1e-7
}
fn default_r0() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    /// Default 1e-16 1/s.
    #[serde(default = "default_predict_lambda")]
    pub lambda: f64,
    /// Default 1e-7 m.
    #[serde(default = "default_r_c")]
    pub r_c: f64,
    /// Cut-off of the DP model for dp-photon constraints. Default 1e-9 m.
    #[serde(default = "default_r0")]
    pub r0: f64,
    /// Default: the built-in constraint suite.
    #[serde(default)]
    pub constraints: Option<Vec<ExperimentConstraint>>,
}

impl Default for PredictConfig {
    fn default() -> Self {
        Self {
            lambda: default_predict_lambda(),
            r_c: default_r_c(),
            r0: default_r0(),
            constraints: None,
        }
    }
}

impl PredictConfig {
    fn check(&self, v: &mut Violations) {
        v.lambda("predict", self.lambda);
        v.positive("predict", "r_c", self.r_c);
        v.positive("predict", "r0", self.r0);
        if let Some(list) = &self.constraints {
            check_constraints("predict", list, v);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    /// Default: the built-in constraint suite.
    #[serde(default)]
    pub constraints: Option<Vec<ExperimentConstraint>>,
    /// Default: `r_c` in [1e-9, 1e-3] m (121 points), `lambda` in [1e-20, 1e-4] 1/s (161 points).
    #[serde(default)]
    pub grid: GridSpec,
    /// Lower bound from suppressing macroscopic superpositions; default a 10 µm water
    /// droplet split by 10 µm within 10 ms. `null` disables it.
    #[serde(default = "default_macro")]
    pub macroscopicity: Option<MacroscopicitySpec>,
}

fn default_macro() -> Option<MacroscopicitySpec> {
    Some(MacroscopicitySpec::default())
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            constraints: None,
            grid: GridSpec::default(),
            macroscopicity: default_macro(),
        }
    }
}

impl BoundsConfig {
    fn check(&self, v: &mut Violations) {
        if let Some(list) = &self.constraints {
            check_constraints("bounds", list, v);
        }
        v.result("bounds.grid", self.grid.validate());
        if let Some(m) = &self.macroscopicity {
            v.positive("bounds.macroscopicity", "diameter", m.diameter);
            v.positive("bounds.macroscopicity", "density", m.density);
            v.positive("bounds.macroscopicity", "separation", m.separation);
            v.positive("bounds.macroscopicity", "time", m.time);
        }
    }
}

/// Window `[x_min, x_max]` sampled at `points` positions (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

fn default_source() -> TwoPacketSource {
    TwoPacketSource {
        mass: 1.66053906660e-23,
        separation: 5e-7,
        width: 5e-8,
        time: 1e-2,
    }
}

fn default_window() -> WindowConfig {
    WindowConfig {
        x_min: -4e-7,
        x_max: 4e-7,
        points: 81,
    }
}

fn default_interference_lambda() -> f64 {
    1e-7
}

fn white() -> Variant {
    Variant::White
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceConfig {
    /// Default: 1e4 u, separation 500 nm, packet width 50 nm, 10 ms of free flight.
    #[serde(default = "default_source")]
    pub source: TwoPacketSource,
    /// Default 1e-7 1/s.
    #[serde(default = "default_interference_lambda")]
    pub lambda: f64,
    /// Default 1e-7 m.
    #[serde(default = "default_r_c")]
    pub r_c: f64,
    /// Default white noise.
    #[serde(default = "white")]
    pub variant: Variant,
    /// Default [-400 nm, 400 nm] at 81 points.
    #[serde(default = "default_window")]
    pub window: WindowConfig,
}

impl Default for InterferenceConfig {
    fn default() -> Self {
        Self {
            source: default_source(),
            lambda: default_interference_lambda(),
            r_c: default_r_c(),
            variant: white(),
            window: default_window(),
        }
    }
}

impl InterferenceConfig {
    fn check(&self, v: &mut Violations) {
        let p = "interference";
        v.result("interference.source", self.source.validate());
        v.lambda(p, self.lambda);
        v.positive(p, "r_c", self.r_c);
        v.result("interference.variant", self.variant.validate());
        if !(self.window.x_max > self.window.x_min) || !self.window.x_min.is_finite() || !self.window.x_max.is_finite() {
            v.push("interference.window: x_max must exceed x_min".into());
        }
        if self.window.points < 2 {
            v.push("interference.window.points: at least 2 points are required".into());
        }
    }
}

fn check_constraints(path: &str, list: &[ExperimentConstraint], v: &mut Violations) {
    let mut ids = std::collections::HashSet::new();
    for c in list {
        v.result(&format!("{path}.constraints[{}]", c.id), c.validate());
        if !ids.insert(c.id.as_str()) {
            v.push(format!("{path}.constraints: duplicate id {}", c.id));
        }
    }
}

/// Complete description of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    /// Seed of the per-trajectory random streams. Default 0.
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads; default all available cores.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_eq: Option<MasterEqConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predict: Option<PredictConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interference: Option<InterferenceConfig>,
}

impl RunConfig {
    /// A config for `subcommand` with every default filled in.
    pub fn new(subcommand: Subcommand) -> Self {
        let mut cfg = Self {
            subcommand,
            master_seed: 0,
            workers: None,
            output: OutputConfig::default(),
            trajectory: None,
            master_eq: None,
            predict: None,
            bounds: None,
            interference: None,
        };
        cfg.fill_defaults();
        cfg
    }

    fn present_sections(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.trajectory.is_some() {
            out.push("trajectory");
        }
        if self.master_eq.is_some() {
            out.push("master_eq");
        }
        if self.predict.is_some() {
            out.push("predict");
        }
        if self.bounds.is_some() {
            out.push("bounds");
        }
        if self.interference.is_some() {
            out.push("interference");
        }
        out
    }

    fn fill_defaults(&mut self) {
        match self.subcommand {
            Subcommand::Trajectory => {
                self.trajectory.get_or_insert_with(TrajectoryConfig::default);
            }
            Subcommand::MasterEq => {
                self.master_eq.get_or_insert_with(MasterEqConfig::default);
            }
            Subcommand::Predict => {
                self.predict.get_or_insert_with(PredictConfig::default);
            }
            Subcommand::Bounds => {
                self.bounds.get_or_insert_with(BoundsConfig::default);
            }
            Subcommand::Interference => {
                self.interference.get_or_insert_with(InterferenceConfig::default);
            }
        }
    }

    /// Collects every violation instead of stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut v = Violations::default();
        for s in self.present_sections() {
            if s != self.subcommand.section() {
                v.push(format!("section `{s}` does not apply to subcommand {}", self.subcommand.as_str()));
            }
        }
        if self.workers == Some(0) {
            v.push("workers must be ≥ 1".into());
        }
        if let Some(t) = &self.trajectory {
            t.check(&mut v);
        }
        if let Some(m) = &self.master_eq {
            m.check(&mut v);
        }
        if let Some(p) = &self.predict {
            p.check(&mut v);
        }
        if let Some(b) = &self.bounds {
            b.check(&mut v);
        }
        if let Some(i) = &self.interference {
            i.check(&mut v);
        }
        v.finish()
    }

    pub fn worker_count(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }
}

#[derive(Default)]
struct Violations(Vec<String>);

impl Violations {
    fn push(&mut self, msg: String) {
        self.0.push(msg);
    }

    fn lambda(&mut self, path: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.push(format!("{path}.lambda: λ must be ≥ 0, got {v}"));
        }
    }

    fn nonneg(&mut self, path: &str, name: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.push(format!("{path}.{name}: must be ≥ 0, got {v}"));
        }
    }

    fn positive(&mut self, path: &str, name: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.push(format!("{path}.{name}: must be > 0, got {v}"));
        }
    }

    fn finite(&mut self, path: &str, name: &str, v: f64) {
        if !v.is_finite() {
            self.push(format!("{path}.{name}: must be finite, got {v}"));
        }
    }

    fn at_least_one(&mut self, path: &str, name: &str, v: usize) {
        if v == 0 {
            self.push(format!("{path}.{name}: must be ≥ 1"));
        }
    }

    fn result(&mut self, path: &str, r: Result<()>) {
        match r {
            Ok(()) => {}
            Err(Error::Violations(list)) => self.0.extend(list.into_iter().map(|m| format!("{path}: {m}"))),
            Err(e) => self.push(format!("{path}: {e}")),
        }
    }

    fn finish(self) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Error::Violations(self.0))
        }
    }
}

/// Parses and validates a JSON run configuration, filling in defaults.
///
/// Syntax and schema errors (including unknown keys) carry the line and column of the
/// offending token; value errors are reported together as [`Error::Violations`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        Error::Config(format!("line {}, column {}: {msg}", e.line(), e.column()))
    })?;
    cfg.validate()?;
    cfg.fill_defaults();
    Ok(cfg)
}

/// One CSV/JSON cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(s: &str) -> Cell {
        if let Ok(i) = s.parse::<u64>() {
            return Cell::Int(i);
        }
        match s.parse::<f64>() {
            Ok(v) => Cell::Num(v),
            Err(_) => Cell::Text(s.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A named rectangular dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// CSV text: header row, `.` decimal point, 17 significant digits, LF line endings.
    pub fn to_csv(&self) -> Result<String> {
        if self.rows.is_empty() {
            return Err(Error::InvalidParameter(format!("dataset {} is empty", self.name)));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    pub fn from_csv(name: &str, text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let columns = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_error)?.iter().map(Cell::parse).collect());
        }
        Ok(Self {
            name: name.to_string(),
            columns,
            rows,
        })
    }

    /// JSON object `{name, columns, rows}` with keys in that order.
    pub fn to_json(&self) -> Result<String> {
        if self.rows.is_empty() {
            return Err(Error::InvalidParameter(format!("dataset {} is empty", self.name)));
        }
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Writes `table` to `dir/<name>.<ext>` and returns the path.
pub fn export(table: &Table, format: Format, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(format!("{}.{}", table.name, format.extension()));
    fs::write(&path, table.render(format)?)?;
    Ok(path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Ensemble of stochastic trajectories with its index-ordered aggregate.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub records: Vec<TrajectoryRecord>,
    /// Columns `time, n`, then `<obs>_mean, <obs>_stderr, <obs>_var_mean` per observable.
    pub aggregate: Table,
}

impl Ensemble {
    /// Per-trajectory table with columns `trajectory, time, <obs>...`.
    pub fn trajectory_table(&self) -> Table {
        let names: Vec<&str> = self.records[0].observables.iter().map(|o| o.name.as_str()).collect();
        let mut cols = vec!["trajectory", "time"];
        cols.extend(&names);
        let mut t = Table::new("trajectories", &cols);
        for (i, r) in self.records.iter().enumerate() {
            for (k, &time) in r.times.iter().enumerate() {
                let mut row = vec![Cell::Int(i as u64), Cell::Num(time)];
                row.extend(r.observables.iter().map(|o| Cell::Num(o.mean[k])));
                t.push(row);
            }
        }
        t
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::Config("workers must be ≥ 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

enum Engine {
    Sde {
        model: CollapseSdeModel,
        psi0: StateVector,
        observables: Vec<(String, HermitianOperator)>,
    },
    Grw {
        sim: GrwSimulator<GridLocalizer>,
        psi0: StateVector,
        observables: Vec<(String, HermitianOperator)>,
    },
}

fn build_engine(cfg: &TrajectoryConfig, consts: &PhysicalConstants) -> Result<Engine> {
    let packets = |grid: &Grid1D, p: &PacketConfig| StateVector::two_packets(grid, p.separation, p.width);
    Ok(match &cfg.model {
        TrajectoryModel::Spin { gamma, theta, omega } => {
            let h = HermitianOperator::sigma_x().scaled(0.5 * omega);
            let model = CollapseSdeModel::generic(h, vec![HermitianOperator::sigma_z()], *gamma, 1.0)?;
            let psi0 = StateVector::abstract_from(&[c(theta.cos()), c(theta.sin())])?;
            Engine::Sde {
                model,
                psi0,
                observables: vec![("sigma_z".into(), HermitianOperator::sigma_z())],
            }
        }
        TrajectoryModel::Csl {
            lambda,
            r_c,
            mass,
            grid,
            packets: p,
        } => {
            let g = grid.build()?;
            let model = CollapseSdeModel::csl_grid(&g, HermitianOperator::zeros(g.len()), *mass, *lambda, *r_c, consts.m0, consts.hbar)?;
            Engine::Sde {
                psi0: packets(&g, p)?,
                observables: vec![("x".into(), HermitianOperator::position(&g))],
                model,
            }
        }
        TrajectoryModel::Diosi {
            r0,
            mass,
            grid,
            packets: p,
        } => {
            let g = grid.build()?;
            let model = CollapseSdeModel::diosi_grid(&g, HermitianOperator::zeros(g.len()), *mass, *r0, consts.g, consts.hbar)?;
            Engine::Sde {
                psi0: packets(&g, p)?,
                observables: vec![("x".into(), HermitianOperator::position(&g))],
                model,
            }
        }
        TrajectoryModel::Grw {
            lambda,
            r_c,
            grid,
            packets: p,
        } => {
            let g = grid.build()?;
            let params = GrwParams::new(*lambda, *r_c)?;
            let h = HermitianOperator::zeros(g.len());
            let sim = GrwSimulator::new(&h, params, GridLocalizer::new(g, *r_c)?, consts.hbar)?;
            Engine::Grw {
                psi0: packets(&g, p)?,
                observables: vec![("x".into(), HermitianOperator::position(&g))],
                sim,
            }
        }
    })
}

fn grw_record(
    sim: &GrwSimulator<GridLocalizer>,
    psi0: &StateVector,
    observables: &[(String, HermitianOperator)],
    times: &[f64],
    duration: f64,
    master_seed: u64,
    index: u64,
) -> Result<TrajectoryRecord> {
    let mut rng = rng::stream(master_seed, index);
    let run = sim.run(psi0, duration, times, &mut rng)?;
    let mut series = Vec::with_capacity(observables.len());
    for (name, op) in observables {
        let mut s = ObservableSeries {
            name: name.clone(),
            mean: Vec::with_capacity(times.len()),
            variance: Vec::with_capacity(times.len()),
        };
        for psi in &run.snapshots {
            s.mean.push(psi.expectation(op)?);
            s.variance.push(psi.variance(op)?.max(0.0));
        }
        series.push(s);
    }
    Ok(TrajectoryRecord {
        seed: rng::stream_id(master_seed, index),
        times: times.to_vec(),
        observables: series,
        snapshots: Vec::new(),
    })
}

/// Runs `cfg.ensemble` trajectories on `workers` threads. Trajectory `i` draws from
/// `rng::stream(master_seed, i)` and the aggregate is reduced in index order, so the
/// output does not depend on the worker count.
pub fn run_ensemble(cfg: &TrajectoryConfig, master_seed: u64, workers: usize, consts: &PhysicalConstants) -> Result<Ensemble> {
    if cfg.ensemble == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let plan = cfg.plan()?;
    let engine = build_engine(cfg, consts)?;
    let pool = thread_pool(workers)?;
    let times = plan.record_times();
    let records: Vec<TrajectoryRecord> = pool.install(|| {
        (0..cfg.ensemble)
            .into_par_iter()
            .map(|i| {
                let out = match &engine {
                    Engine::Sde {
                        model,
                        psi0,
                        observables,
                    } => simulate_sde_trajectory(model, psi0, &plan, cfg.scheme, observables, master_seed, i as u64),
                    Engine::Grw { sim, psi0, observables } => {
                        grw_record(sim, psi0, observables, &times, cfg.duration, master_seed, i as u64)
                    }
                };
                out.map_err(|e| Error::Trajectory {
                    index: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let aggregate = aggregate(&records);
    Ok(Ensemble { records, aggregate })
}

fn aggregate(records: &[TrajectoryRecord]) -> Table {
    let first = &records[0];
    let mut cols = vec!["time".to_string(), "n".to_string()];
    for o in &first.observables {
        cols.push(format!("{}_mean", o.name));
        cols.push(format!("{}_stderr", o.name));
        cols.push(format!("{}_var_mean", o.name));
    }
    let mut t = Table {
        name: "aggregate".into(),
        columns: cols,
        rows: Vec::new(),
    };
    for (k, &time) in first.times.iter().enumerate() {
        let mut row = vec![Cell::Num(time), Cell::Int(records.len() as u64)];
        for j in 0..first.observables.len() {
            let means: Vec<f64> = records.iter().map(|r| r.observables[j].mean[k]).collect();
            let vars: Vec<f64> = records.iter().map(|r| r.observables[j].variance[k]).collect();
            row.push(Cell::Num(stats::mean(&means)));
            row.push(Cell::Num(if means.len() > 1 { stats::std_error(&means) } else { f64::NAN }));
            row.push(Cell::Num(stats::mean(&vars)));
        }
        t.push(row);
    }
    t
}

/// Density-matrix evolution: columns `time, trace, purity, coherence`, where `coherence`
/// is `|rho(x_L, x_R)|` relative to its initial value at the packet centers.
pub fn run_master_eq(cfg: &MasterEqConfig, consts: &PhysicalConstants) -> Result<Table> {
    let grid = cfg.grid.build()?;
    let psi0 = StateVector::two_packets(&grid, cfg.packets.separation, cfg.packets.width)?;
    let rho0 = psi0.density().into_matrix();
    let h = HermitianOperator::zeros(grid.len());
    let (jl, jr) = (grid.nearest(-0.5 * cfg.packets.separation), grid.nearest(0.5 * cfg.packets.separation));
    let c0 = rho0[(jl, jr)].norm();
    if c0 == 0.0 {
        return Err(Error::InvalidParameter("packets have no overlap with the grid".into()));
    }
    let rhs: Box<dyn Fn(&CMatrix) -> Result<CMatrix> + '_> = match &cfg.model {
        MasterModel::Grw { lambda, r_c } => {
            let params = GrwParams::new(*lambda, *r_c)?;
            let loc = GridLocalizer::new(grid, *r_c)?;
            let kernels = vec![loc.kernel(0)];
            Box::new(move |r| grw_master_rhs_with(r, &h, params.lambda, &kernels, consts.hbar))
        }
        MasterModel::Csl { lambda, r_c, mass } => {
            let (l, rc, m) = (*lambda, *r_c, *mass);
            Box::new(move |r| csl_me_rhs(r, &h, &grid, l, rc, m, consts.m0, consts.hbar))
        }
        MasterModel::Dp { r0, mass, radius } => {
            let dist = match radius {
                Some(rad) => MassDistribution::sphere(*rad, *mass)?,
                None => MassDistribution::point(*mass)?,
            };
            let r0 = *r0;
            Box::new(move |r| dp_me_rhs(r, &h, &grid, &dist, r0, consts.g, consts.hbar))
        }
    };
    let rk = Rk4::new(cfg.duration / cfg.steps as f64)?;
    let mut table = Table::new("master_eq", &["time", "trace", "purity", "coherence"]);
    let mut k = 0usize;
    let record_every = cfg.record_every;
    let steps = cfg.steps;
    rk.evolve(
        &rho0,
        cfg.duration,
        |_, r| rhs(r),
        |t, r| {
            if k.is_multiple_of(record_every) || k == steps {
                let trace = r.trace().re;
                let purity = (r * r).trace().re;
                table.push(vec![
                    Cell::Num(t),
                    Cell::Num(trace),
                    Cell::Num(purity),
                    Cell::Num(r[(jl, jr)].norm() / c0),
                ]);
            }
            k += 1;
        },
    )?;
    Ok(table)
}

/// Predictions for every constraint: `id, kind, units, value, limit, excluded, status`.
pub fn run_predict(cfg: &PredictConfig, consts: &PhysicalConstants) -> Result<Table> {
    let list = cfg.constraints.clone().unwrap_or_else(default_constraints);
    let mut t = Table::new("predictions", &["id", "kind", "units", "value", "limit", "excluded", "status"]);
    for c in &list {
        let value = if c.is_dp() {
            predict_dp(c, cfg.r0, consts)
        } else {
            predict(c, cfg.lambda, cfg.r_c, consts)
        };
        let limit = c.measured_limit(consts);
        let (value_cell, excluded, status) = match (&value, &limit) {
            (Ok(v), Ok(l)) => (Cell::Num(*v), if v > l { "yes" } else { "no" }, "ok".to_string()),
            (Ok(v), Err(e)) => (Cell::Num(*v), "unknown", e.to_string()),
            (Err(e), _) => (Cell::Num(f64::NAN), "unknown", e.to_string()),
        };
        t.push(vec![
            Cell::from(c.id.as_str()),
            Cell::from(c.system.name()),
            Cell::from(c.system.units()),
            value_cell,
            Cell::Num(*limit.as_ref().unwrap_or(&f64::NAN)),
            Cell::from(excluded),
            Cell::from(status),
        ]);
    }
    Ok(t)
}

/// Results of the `bounds` subcommand.
#[derive(Debug, Clone)]
pub struct BoundsOutput {
    pub grid: ExclusionGrid,
    /// Columns `r_c, lambda, verdict, binding_id`.
    pub cells: Table,
    /// Columns `r_c, lambda_max, binding_id, lambda_min_macro`.
    pub columns: Table,
    /// Columns `id, r0_min` for DP constraints.
    pub dp: Option<Table>,
}

pub fn exclusion_table(grid: &ExclusionGrid) -> Table {
    let mut t = Table::new("exclusion_grid", &["r_c", "lambda", "verdict", "binding_id"]);
    for (i, &r) in grid.r_c.iter().enumerate() {
        for (j, &l) in grid.lambda.iter().enumerate() {
            t.push(vec![
                Cell::Num(r),
                Cell::Num(l),
                Cell::from(grid.verdict[i][j].as_str()),
                Cell::from(grid.binding_id(i, j).unwrap_or("")),
            ]);
        }
    }
    t
}

pub fn run_bounds(cfg: &BoundsConfig, consts: &PhysicalConstants) -> Result<BoundsOutput> {
    let list = cfg.constraints.clone().unwrap_or_else(default_constraints);
    let grid = exclusion_region(&list, &cfg.grid, consts)?;
    let cells = exclusion_table(&grid);
    let mut columns = Table::new("column_bounds", &["r_c", "lambda_max", "binding_id", "lambda_min_macro"]);
    for col in &grid.columns {
        let lower = match &cfg.macroscopicity {
            Some(spec) => macroscopicity_lower_bound(col.r_c, spec, consts)?,
            None => f64::NAN,
        };
        columns.push(vec![
            Cell::Num(col.r_c),
            Cell::Num(col.lambda_max.unwrap_or(f64::NAN)),
            Cell::from(col.binding.map(|k| grid.constraint_ids[k].as_str()).unwrap_or("")),
            Cell::Num(lower),
        ]);
    }
    let dp_list: Vec<&ExperimentConstraint> = list.iter().filter(|c| c.is_dp()).collect();
    let dp = if dp_list.is_empty() {
        None
    } else {
        let mut t = Table::new("dp_bounds", &["id", "r0_min"]);
        for c in dp_list {
            t.push(vec![Cell::from(c.id.as_str()), Cell::Num(r0_lower_bound(c, consts)?)]);
        }
        Some(t)
    };
    Ok(BoundsOutput {
        grid,
        cells,
        columns,
        dp,
    })
}

/// Interference pattern: columns `x, density, reference`, plus visibilities.
pub fn run_interference(cfg: &InterferenceConfig, consts: &PhysicalConstants) -> Result<(Table, InterferenceSummary)> {
    let grid = Grid1D::new(cfg.window.x_min, cfg.window.x_max, cfg.window.points)?;
    let params = CslParams::new(cfg.lambda, cfg.r_c)?;
    let pattern = free_density_1d(&cfg.source, &grid, &params, &cfg.variant, consts)?;
    let mut t = Table::new("pattern", &["x", "density", "reference"]);
    for k in 0..pattern.x.len() {
        t.push(vec![
            Cell::Num(pattern.x[k]),
            Cell::Num(pattern.density[k]),
            Cell::Num(pattern.reference[k]),
        ]);
    }
    let summary = InterferenceSummary {
        visibility: pattern.visibility(),
        reference_visibility: pattern.reference_visibility(),
    };
    Ok((t, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceSummary {
    pub visibility: f64,
    pub reference_visibility: f64,
}

/// Everything a run produced, before anything is written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    /// Additional JSON documents as `(file name, text)`.
    pub documents: Vec<(String, String)>,
}

/// Runs the subcommand selected by `cfg` without touching the file system.
pub fn run(cfg: &RunConfig, consts: &PhysicalConstants) -> Result<RunOutput> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    cfg.fill_defaults();
    let workers = cfg.worker_count();
    let mut documents = Vec::new();
    let tables = match cfg.subcommand {
        Subcommand::Trajectory => {
            let t = cfg.trajectory.as_ref().expect("filled");
            let ens = run_ensemble(t, cfg.master_seed, workers, consts)?;
            let mut out = vec![ens.aggregate.clone()];
            if t.write_trajectories {
                out.push(ens.trajectory_table());
            }
            out
        }
        Subcommand::MasterEq => {
            let pool = thread_pool(workers)?;
            vec![pool.install(|| run_master_eq(cfg.master_eq.as_ref().expect("filled"), consts))?]
        }
        Subcommand::Predict => vec![run_predict(cfg.predict.as_ref().expect("filled"), consts)?],
        Subcommand::Bounds => {
            let pool = thread_pool(workers)?;
            let b = pool.install(|| run_bounds(cfg.bounds.as_ref().expect("filled"), consts))?;
            let mut out = vec![b.cells, b.columns];
            out.extend(b.dp);
            out
        }
        Subcommand::Interference => {
            let (t, s) = run_interference(cfg.interference.as_ref().expect("filled"), consts)?;
            documents.push(("summary.json".to_string(), serde_json::to_string_pretty(&s)? + "\n"));
            vec![t]
        }
    };
    Ok(RunOutput { tables, documents })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputChecksum {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Provenance record written next to the outputs of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: Subcommand,
    /// The resolved configuration, defaults included.
    pub config: RunConfig,
    pub constants_version: String,
    pub code_version: String,
    pub workers: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputChecksum>,
}

/// Runs `cfg` and writes its outputs and [`MANIFEST_FILE`] into `cfg.output.dir`.
pub fn execute(cfg: &RunConfig, consts: &PhysicalConstants) -> Result<RunManifest> {
    let start = Instant::now();
    cfg.validate()?;
    let mut resolved = cfg.clone();
    resolved.fill_defaults();
    let out = run(&resolved, consts)?;
    let dir = resolved.output.dir.clone();
    fs::create_dir_all(&dir)?;
    let mut outputs = Vec::new();
    let mut record = |path: PathBuf, bytes: &[u8]| -> Result<()> {
        fs::write(&path, bytes)?;
        outputs.push(OutputChecksum {
            file: path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    };
    for t in &out.tables {
        let text = t.render(resolved.output.format)?;
        record(dir.join(format!("{}.{}", t.name, resolved.output.format.extension())), text.as_bytes())?;
    }
    for (name, text) in &out.documents {
        record(dir.join(name), text.as_bytes())?;
    }
    let manifest = RunManifest {
        subcommand: resolved.subcommand,
        workers: resolved.worker_count(),
        config: resolved,
        constants_version: consts.version.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs,
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

/// Recomputes the checksum of every output listed in a manifest; returns the mismatches.
pub fn verify_manifest(manifest: &RunManifest, dir: &Path) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for o in &manifest.outputs {
        if sha256_file(&dir.join(&o.file))? != o.sha256 {
            bad.push(o.file.clone());
        }
    }
    Ok(bad)
}

/// Human-readable one-line-per-output summary.
pub fn describe(manifest: &RunManifest) -> String {
    let mut s = String::new();
    for o in &manifest.outputs {
        let _ = writeln!(s, "{}  {}  {} bytes", o.sha256, o.file, o.bytes);
    }
    let _ = writeln!(s, "{MANIFEST_FILE}  ({:.3} s)", manifest.wall_time_s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::codata()
    }

    #[test]
    fn minimal_trajectory_config_gets_defaults() {
        let cfg = parse_config(r#"{"subcommand": "trajectory"}"#).unwrap();
        assert_eq!(cfg.master_seed, 0);
        assert_eq!(cfg.output, OutputConfig::default());
        assert_eq!(cfg.trajectory, Some(TrajectoryConfig::default()));
    }

    #[test]
    fn negative_lambda_is_a_violation() {
        let text = r#"{"subcommand": "predict", "predict": {"lambda": -1, "r_c": -2}}"#;
        match parse_config(text) {
            Err(Error::Violations(v)) => {
                assert_eq!(v.len(), 2, "{v:?}");
                assert!(v[0].contains("λ must be ≥ 0"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let text = "{\"subcommand\": \"predict\",\n \"predict\": {\"lamda\": 1e-8}}";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("lamda") && err.contains("line 2"), "{err}");
        let err = parse_config("{\"subcommand\": \"bounds\",\n  \"x\": 1").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn foreign_section_is_rejected() {
        let text = r#"{"subcommand": "predict", "bounds": {}}"#;
        assert!(matches!(parse_config(text), Err(Error::Violations(_))));
    }

    #[test]
    fn empty_ensemble() {
        let cfg = TrajectoryConfig {
            ensemble: 0,
            ..Default::default()
        };
        let err = run_ensemble(&cfg, 1, 1, &consts()).unwrap_err();
        assert_eq!(err.to_string(), "empty ensemble");
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let mut t = Table::new("t", &["a", "b", "label"]);
        t.push(vec![Cell::Num(0.1), Cell::Int(3), Cell::from("x")]);
        t.push(vec![Cell::Num(-1.0 / 3.0), Cell::Int(4), Cell::from("")]);
        let text = t.to_csv().unwrap();
        assert!(!text.contains('\r'));
        assert!(text.starts_with("a,b,label\n1.0000000000000001e-1,3,x\n"));
        let back = Table::from_csv("t", &text).unwrap();
        assert_eq!(back.rows[1][0].as_f64().unwrap(), -1.0 / 3.0);
        assert_eq!(back.columns, t.columns);
        assert!(Table::new("e", &["a"]).to_csv().is_err());
    }

    #[test]
    fn json_keys_keep_order() {
        let mut t = Table::new("t", &["a"]);
        t.push(vec![Cell::Num(1.5)]);
        let text = t.to_json().unwrap();
        let (n, c, r) = (text.find("\"name\"").unwrap(), text.find("\"columns\"").unwrap(), text.find("\"rows\"").unwrap());
        assert!(n < c && c < r);
    }

    #[test]
    fn trajectory_table_columns() {
        let cfg = TrajectoryConfig {
            ensemble: 3,
            steps: 100,
            record_every: 10,
            duration: 0.5,
            ..Default::default()
        };
        let ens = run_ensemble(&cfg, 9, 2, &consts()).unwrap();
        let t = ens.trajectory_table();
        assert_eq!(t.columns.len(), 2 + 1);
        assert_eq!(t.rows.len(), 3 * 11);
        assert_eq!(ens.aggregate.columns, ["time", "n", "sigma_z_mean", "sigma_z_stderr", "sigma_z_var_mean"]);
    }

    #[test]
    fn master_eq_grw_coherence_decays() {
        let cfg = MasterEqConfig {
            steps: 100,
            ..Default::default()
        };
        let t = run_master_eq(&cfg, &consts()).unwrap();
        let last = t.rows.last().unwrap();
        assert_eq!(last[0].as_f64().unwrap(), 1.0);
        assert!((last[1].as_f64().unwrap() - 1.0).abs() < 1e-9);
        let coh = last[3].as_f64().unwrap();
        assert!((coh - (-1.0f64).exp()).abs() < 0.02, "{coh}");
    }

    #[test]
    fn predict_default_suite() {
        let t = run_predict(&PredictConfig::default(), &consts()).unwrap();
        assert_eq!(t.rows.len(), default_constraints().len());
        let status = t.column("status").unwrap();
        assert!(t.rows.iter().all(|r| r[status].as_str() == Some("ok")));
    }
}
