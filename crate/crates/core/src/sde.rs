// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Continuous collapse: the Ito collapse equation with commuting collapse operators,
//! its imaginary-noise (Stratonovich) unraveling, and the CSL / Diosi grid models with
//! spatially correlated noise.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, commutator, max_abs, CMatrix, CVector, UnitaryPropagator, I};
use crate::master::smeared_coulomb;
use crate::quantum::{spatial_correlator, Basis, Grid1D, HermitianOperator, QuantumState, StateVector};
use crate::rng;
use crate::stats;

const COMMUTE_TOL: f64 = 1e-10;
const CLIP_TOL: f64 = 1e-12;
const DROP_TOL: f64 = 1e-14;
const MAX_NORM_DRIFT: f64 = 0.1;
const DEFAULT_STRENGTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Generic,
    Csl,
    Dp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Ito,
    ImaginaryNoise,
}

#[derive(Debug, Clone)]
enum CollapseOps {
    Dense(Vec<CMatrix>),
    /// `B_j = scale * P_j` with `P_j` the projector on basis element `j`.
    Sites { scale: f64 },
}

/// Wiener increments for one step, already correlated.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIncrement(pub DVector<f64>);

/// Collapse dynamics `sqrt(gamma) sum_j (B_j - <B_j>) dW_j` with `E[dW_j dW_k] = C_jk dt`.
#[derive(Debug, Clone)]
pub struct CollapseSdeModel {
    h: HermitianOperator,
    propagator: UnitaryPropagator,
    ops: CollapseOps,
    gamma: f64,
    /// Noise factor `F` with `F F^T = C`; `None` means `C = 1`.
    factor: Option<DMatrix<f64>>,
    flavor: Flavor,
    hbar: f64,
    basis: Basis,
}

/// `F = U sqrt(Lambda)` keeping eigenvalues above `1e-14 max`; negative eigenvalues below
/// `-1e-12 max` are rejected.
pub fn covariance_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(cov.clone());
    let top = eig.eigenvalues.max();
    if !(top > 0.0) {
        return Err(Error::NotPositiveSemidefinite(top));
    }
    let min = eig.eigenvalues.min();
    if min < -CLIP_TOL * top {
        return Err(Error::NotPositiveSemidefinite(min));
    }
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] > DROP_TOL * top)
        .collect();
    let n = cov.nrows();
    Ok(DMatrix::from_fn(n, keep.len(), |i, j| {
        eig.eigenvectors[(i, keep[j])] * eig.eigenvalues[keep[j]].sqrt()
    }))
}

impl CollapseSdeModel {
    /// Independent noises (`C = 1`) on mutually commuting operators.
    pub fn generic(h: HermitianOperator, ops: Vec<HermitianOperator>, gamma: f64, hbar: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        if ops.is_empty() {
            return Err(Error::InvalidParameter("at least one collapse operator required".into()));
        }
        let d = h.dim();
        for a in &ops {
            if a.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: a.dim(),
                });
            }
        }
        for (i, a) in ops.iter().enumerate() {
            for b in &ops[i + 1..] {
                let r = max_abs(&commutator(a.matrix(), b.matrix()));
                if r > COMMUTE_TOL * max_abs(a.matrix()).max(1.0) * max_abs(b.matrix()).max(1.0) {
                    return Err(Error::NonCommuting(r));
                }
            }
        }
        Ok(Self {
            propagator: UnitaryPropagator::new(h.matrix(), hbar),
            h,
            ops: CollapseOps::Dense(ops.into_iter().map(HermitianOperator::into_matrix).collect()),
            gamma,
            factor: None,
            flavor: Flavor::Generic,
            hbar,
            basis: Basis::Abstract,
        })
    }

    fn sites(
        grid: &Grid1D,
        h: HermitianOperator,
        scale: f64,
        gamma: f64,
        cov: DMatrix<f64>,
        flavor: Flavor,
        hbar: f64,
    ) -> Result<Self> {
        if h.dim() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: h.dim(),
            });
        }
        let factor = if gamma > 0.0 { Some(covariance_factor(&cov)?) } else { None };
        Ok(Self {
            propagator: UnitaryPropagator::new(h.matrix(), hbar),
            h,
            ops: CollapseOps::Sites { scale },
            gamma,
            factor,
            flavor,
            hbar,
            basis: Basis::Grid(*grid),
        })
    }

    /// CSL for one particle of mass `m`: `B_j = m P_j`, `gamma = lambda / m0^2`,
    /// `C_jk = exp(-(x_j - x_k)^2 / 4 r_C^2)`.
    #[allow(clippy::too_many_arguments)]
    pub fn csl_grid(
        grid: &Grid1D,
        h: HermitianOperator,
        mass: f64,
        lambda: f64,
        r_c: f64,
        m0: f64,
        hbar: f64,
    ) -> Result<Self> {
        if !(lambda >= 0.0) || !(r_c > 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "CSL grid model needs lambda >= 0, r_C > 0, m > 0 (got {lambda}, {r_c}, {mass})"
            )));
        }
        grid.require_resolution(r_c)?;
        grid.require_half_span(8.0 * r_c)?;
        let xs = grid.points();
        let cov = DMatrix::from_fn(grid.len(), grid.len(), |j, k| spatial_correlator(xs[j], xs[k], r_c));
        Self::sites(grid, h, mass, lambda / (m0 * m0), cov, Flavor::Csl, hbar)
    }

    /// Diosi model for one particle of mass `m`: `B_j = m P_j`, `gamma = G / hbar`,
    /// `C_jk = erf(|x_j - x_k| / 2R0) / |x_j - x_k|`.
    pub fn diosi_grid(grid: &Grid1D, h: HermitianOperator, mass: f64, r0: f64, g: f64, hbar: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::DivergentSelfEnergy);
        }
        if !(g >= 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Diosi grid model needs G >= 0 and m > 0 (got {g}, {mass})"
            )));
        }
        grid.require_resolution(r0)?;
        let xs = grid.points();
        let cov = DMatrix::from_fn(grid.len(), grid.len(), |j, k| smeared_coulomb(xs[j] - xs[k], r0));
        Self::sites(grid, h, mass, g / hbar, cov, Flavor::Dp, hbar)
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Number of independent standard normals per step.
    pub fn noise_rank(&self) -> usize {
        match (&self.ops, &self.factor) {
            (_, Some(f)) => f.ncols(),
            (CollapseOps::Dense(ops), None) => ops.len(),
            (CollapseOps::Sites { .. }, None) => 0,
        }
    }

    /// Number of Wiener components (one per collapse operator).
    pub fn noise_dim(&self) -> usize {
        match &self.ops {
            CollapseOps::Dense(ops) => ops.len(),
            CollapseOps::Sites { .. } => self.dim(),
        }
    }

    /// Largest `gamma C_jj |B_j|^2`.
    pub fn strength(&self) -> f64 {
        match &self.ops {
            CollapseOps::Dense(ops) => {
                self.gamma * ops.iter().map(|a| max_abs(a).powi(2) * a.nrows() as f64).fold(0.0, f64::max)
            }
            CollapseOps::Sites { scale } => {
                let cmax = self
                    .factor
                    .as_ref()
                    .map_or(0.0, |f| f.row_iter().map(|r| r.norm_squared()).fold(0.0, f64::max));
                self.gamma * scale * scale * cmax
            }
        }
    }

    /// Step with `gamma |A|^2 dt <= 1e-3`, or `1e-3` of the Hamiltonian time scale if there
    /// is no collapse.
    pub fn default_dt(&self, duration: f64) -> f64 {
        let s = self.strength();
        if s > 0.0 {
            (DEFAULT_STRENGTH / s).min(duration)
        } else {
            duration * DEFAULT_STRENGTH
        }
    }

    pub fn sample_noise<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> NoiseIncrement {
        let sd = dt.sqrt();
        let xi = DVector::from_iterator(
            self.noise_rank(),
            (0..self.noise_rank()).map(|_| rng.sample::<f64, _>(StandardNormal) * sd),
        );
        NoiseIncrement(match &self.factor {
            Some(f) => f * xi,
            None if self.noise_rank() == 0 => DVector::zeros(self.noise_dim()),
            None => xi,
        })
    }

    fn check(&self, psi: &StateVector, dt: f64, noise: &NoiseIncrement) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if psi.amplitudes().len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.amplitudes().len(),
            });
        }
        if let (Basis::Grid(mine), Basis::Grid(theirs)) = (&self.basis, psi.basis()) {
            if mine != theirs {
                return Err(Error::InvalidParameter("state grid differs from the model grid".into()));
            }
        }
        if noise.0.len() != self.noise_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.noise_dim(),
                actual: noise.0.len(),
            });
        }
        Ok(())
    }

    /// Euler-Maruyama step of the Ito collapse equation followed by renormalization. The
    /// Hamiltonian part is applied exactly before the collapse increment.
    pub fn ito_step(&self, psi: &StateVector, dt: f64, noise: &NoiseIncrement) -> Result<StateVector> {
        self.check(psi, dt, noise)?;
        let phi = self.propagator.apply(psi.amplitudes(), dt);
        let w = psi.weight();
        let sg = self.gamma.sqrt();
        let dw = &noise.0;
        let next = match &self.ops {
            CollapseOps::Dense(ops) => {
                let mut out = phi.clone();
                for (a, dwi) in ops.iter().zip(dw.iter()) {
                    let av = a * &phi;
                    let mean = c(phi.dotc(&av).re * w);
                    let shifted = av - &phi * mean;
                    let second = a * &shifted - &shifted * mean;
                    out += shifted * c(sg * dwi);
                    out -= second * c(0.5 * self.gamma * dt);
                }
                out
            }
            CollapseOps::Sites { scale } => {
                if self.gamma == 0.0 {
                    phi
                } else {
                    let f = self.factor.as_ref().expect("factor present when gamma > 0");
                    let p = DVector::from_iterator(phi.len(), phi.iter().map(|v| v.norm_sqr() * w));
                    let ftp = f.transpose() * &p;
                    let cp = f * &ftp;
                    let pcp = ftp.norm_squared();
                    let pdw = p.dot(dw);
                    let s2 = scale * scale;
                    CVector::from_iterator(
                        phi.len(),
                        phi.iter().enumerate().map(|(x, v)| {
                            let cxx = f.row(x).norm_squared();
                            let noise = sg * scale * (dw[x] - pdw);
                            let drift = 0.5 * self.gamma * s2 * (cxx - 2.0 * cp[x] + pcp) * dt;
                            v * (1.0 + noise - drift)
                        }),
                    )
                }
            }
        };
        let norm = (next.norm_squared() * w).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > MAX_NORM_DRIFT {
            return Err(Error::StepTooLarge((norm - 1.0).abs()));
        }
        if (norm - 1.0).abs() > 1e-2 {
            log::debug!("collapse step norm drift {:e}", norm - 1.0);
        }
        StateVector::new(next / c(norm), *psi.basis())
    }

    /// Midpoint (Cayley) step of `i hbar dpsi = [H dt - hbar sqrt(gamma) sum_j B_j dW_j] psi`;
    /// exactly unitary for real noise.
    pub fn imaginary_step(&self, psi: &StateVector, dt: f64, noise: &NoiseIncrement) -> Result<StateVector> {
        self.check(psi, dt, noise)?;
        let sg = self.gamma.sqrt();
        let dw = &noise.0;
        let diag_phase: Option<Vec<f64>> = match &self.ops {
            CollapseOps::Sites { scale } => Some(dw.iter().map(|d| sg * scale * d).collect()),
            CollapseOps::Dense(ops) if ops.iter().all(is_diagonal) => Some(
                (0..self.dim())
                    .map(|k| ops.iter().zip(dw.iter()).map(|(a, d)| sg * a[(k, k)].re * d).sum())
                    .collect(),
            ),
            CollapseOps::Dense(_) => None,
        };
        let amps = psi.amplitudes();
        let out = match (&diag_phase, self.propagator.is_trivial()) {
            (Some(ph), true) => CVector::from_iterator(
                amps.len(),
                amps.iter().zip(ph).map(|(v, p)| v * num_complex::Complex64::from_polar(1.0, *p)),
            ),
            _ => {
                let mut k = self.h.matrix() * c(dt / self.hbar);
                match (&self.ops, &diag_phase) {
                    (_, Some(ph)) => {
                        for (j, p) in ph.iter().enumerate() {
                            k[(j, j)] -= c(*p);
                        }
                    }
                    (CollapseOps::Dense(ops), None) => {
                        for (a, d) in ops.iter().zip(dw.iter()) {
                            k -= a * c(sg * d);
                        }
                    }
                    _ => unreachable!("site operators are diagonal"),
                }
                let half = &k * (I * 0.5);
                let id = CMatrix::identity(amps.len(), amps.len());
                let rhs = (&id - &half) * amps;
                (&id + &half)
                    .lu()
                    .solve(&rhs)
                    .ok_or_else(|| Error::InvalidParameter("singular Cayley system".into()))?
            }
        };
        StateVector::new(out, *psi.basis())
    }
}

fn is_diagonal(a: &CMatrix) -> bool {
    (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| i == j || a[(i, j)] == c(0.0)))
}

/// One Ito step of the generic model.
pub fn ito_collapse_step(psi: &StateVector, model: &CollapseSdeModel, dt: f64, noise: &NoiseIncrement) -> Result<StateVector> {
    model.ito_step(psi, dt, noise)
}

/// One imaginary-noise step.
pub fn imaginary_noise_step(psi: &StateVector, model: &CollapseSdeModel, dt: f64, noise: &NoiseIncrement) -> Result<StateVector> {
    model.imaginary_step(psi, dt, noise)
}

/// One Ito step of a CSL grid model.
pub fn csl_grid_step(psi: &StateVector, model: &CollapseSdeModel, dt: f64, noise: &NoiseIncrement) -> Result<StateVector> {
    if model.flavor() != Flavor::Csl {
        return Err(Error::InvalidParameter("model is not a CSL grid model".into()));
    }
    model.ito_step(psi, dt, noise)
}

/// One Ito step of a Diosi grid model.
pub fn diosi_grid_step(psi: &StateVector, model: &CollapseSdeModel, dt: f64, noise: &NoiseIncrement) -> Result<StateVector> {
    if model.flavor() != Flavor::Dp {
        return Err(Error::InvalidParameter("model is not a Diosi grid model".into()));
    }
    model.ito_step(psi, dt, noise)
}

/// Fixed-step schedule: `steps` steps of `dt`, recording every `record_every` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPlan {
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    #[serde(default)]
    pub snapshots: bool,
}

impl RunPlan {
    pub fn new(dt: f64, steps: usize, record_every: usize, snapshots: bool) -> Result<Self> {
        let plan = Self {
            dt,
            steps,
            record_every,
            snapshots,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || self.steps == 0 || self.record_every == 0 {
            return Err(Error::InvalidParameter(
                "run plan needs dt > 0, steps >= 1, record_every >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn record_times(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for k in 1..=self.steps {
            if k % self.record_every == 0 || k == self.steps {
                out.push(k as f64 * self.dt);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub name: String,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub times: Vec<f64>,
    pub observables: Vec<ObservableSeries>,
    #[serde(skip)]
    pub snapshots: Vec<StateVector>,
}

/// Runs one trajectory on the stream `(master_seed, index)`.
pub fn simulate_sde_trajectory(
    model: &CollapseSdeModel,
    psi0: &StateVector,
    plan: &RunPlan,
    scheme: Scheme,
    observables: &[(String, HermitianOperator)],
    master_seed: u64,
    index: u64,
) -> Result<TrajectoryRecord> {
    plan.validate()?;
    psi0.require_normalized()?;
    let mut rng = rng::stream(master_seed, index);
    let mut psi = psi0.clone();
    let mut record = TrajectoryRecord {
        seed: rng::stream_id(master_seed, index),
        times: Vec::new(),
        observables: observables
            .iter()
            .map(|(name, _)| ObservableSeries {
                name: name.clone(),
                mean: Vec::new(),
                variance: Vec::new(),
            })
            .collect(),
        snapshots: Vec::new(),
    };
    let push = |t: f64, psi: &StateVector, record: &mut TrajectoryRecord| -> Result<()> {
        record.times.push(t);
        for ((_, op), series) in observables.iter().zip(record.observables.iter_mut()) {
            let m = psi.expectation(op)?;
            series.mean.push(m);
            series.variance.push(psi.variance(op)?.max(0.0));
        }
        if plan.snapshots {
            record.snapshots.push(psi.clone());
        }
        Ok(())
    };
    push(0.0, &psi, &mut record)?;
    for k in 1..=plan.steps {
        let noise = model.sample_noise(plan.dt, &mut rng);
        psi = match scheme {
            Scheme::Ito => model.ito_step(&psi, plan.dt, &noise)?,
            Scheme::ImaginaryNoise => model.imaginary_step(&psi, plan.dt, &noise)?,
        };
        if k % plan.record_every == 0 || k == plan.steps {
            push(k as f64 * plan.dt, &psi, &mut record)?;
        }
    }
    Ok(record)
}

/// Ensemble mean of a per-trajectory quantity with a bootstrap band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

const BOOTSTRAP_REPS: usize = 400;
const BOOTSTRAP_SEED: u64 = 0x5eed_b007;

/// `E[V_B(t)]` with a 95% bootstrap band; `observable` indexes the recorded observables.
pub fn variance_decay_series(records: &[TrajectoryRecord], observable: usize) -> Result<EnsembleSeries> {
    ensemble_series(records, |r, k| r.observables[observable].variance[k], observable)
}

/// `E[<B>(t)]` with a 95% bootstrap band.
pub fn mean_series(records: &[TrajectoryRecord], observable: usize) -> Result<EnsembleSeries> {
    ensemble_series(records, |r, k| r.observables[observable].mean[k], observable)
}

fn ensemble_series<F: Fn(&TrajectoryRecord, usize) -> f64>(
    records: &[TrajectoryRecord],
    value: F,
    observable: usize,
) -> Result<EnsembleSeries> {
    let first = records.first().ok_or(Error::EmptyEnsemble)?;
    if observable >= first.observables.len() {
        return Err(Error::InvalidParameter(format!("no observable with index {observable}")));
    }
    if records.iter().any(|r| r.times != first.times) {
        return Err(Error::InvalidParameter("records do not share a time grid".into()));
    }
    let n_t = first.times.len();
    let mut series = EnsembleSeries {
        times: first.times.clone(),
        mean: Vec::with_capacity(n_t),
        lower: Vec::with_capacity(n_t),
        upper: Vec::with_capacity(n_t),
    };
    for k in 0..n_t {
        let xs: Vec<f64> = records.iter().map(|r| value(r, k)).collect();
        let (lo, hi) = stats::bootstrap_mean_band(&xs, BOOTSTRAP_REPS, 0.95, BOOTSTRAP_SEED);
        series.mean.push(stats::mean(&xs));
        series.lower.push(lo);
        series.upper.push(hi);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin_model(gamma: f64) -> CollapseSdeModel {
        CollapseSdeModel::generic(HermitianOperator::zeros(2), vec![HermitianOperator::sigma_z()], gamma, 1.0).unwrap()
    }

    #[test]
    fn noncommuting_operators_rejected() {
        let r = CollapseSdeModel::generic(
            HermitianOperator::zeros(2),
            vec![HermitianOperator::sigma_z(), HermitianOperator::sigma_x()],
            1.0,
            1.0,
        );
        assert!(matches!(r, Err(Error::NonCommuting(_))));
    }

    #[test]
    fn zero_coupling_is_unitary() {
        let h = HermitianOperator::sigma_x();
        let model = CollapseSdeModel::generic(h, vec![HermitianOperator::sigma_z()], 0.0, 1.0).unwrap();
        let psi = StateVector::abstract_from(&[c(1.0), c(0.0)]).unwrap();
        let noise = NoiseIncrement(DVector::from_element(1, 0.3));
        let out = model.ito_step(&psi, 0.01, &noise).unwrap();
        let sz = HermitianOperator::sigma_z();
        assert!((out.expectation(&sz).unwrap() - (0.02f64).cos()).abs() < 1e-12);
    }

    #[test]
    fn step_too_large_detected() {
        let psi = StateVector::abstract_from(&[c(1.0), c(1.0)]).unwrap();
        let noise = NoiseIncrement(DVector::from_element(1, 0.5));
        assert!(matches!(spin_model(1.0).ito_step(&psi, 1.0, &noise), Err(Error::StepTooLarge(_))));
    }

    #[test]
    fn imaginary_noise_conserves_populations() {
        let psi = StateVector::abstract_from(&[c(0.6), c(0.8)]).unwrap();
        let model = spin_model(2.0);
        let mut rng = rng::stream(3, 0);
        let mut s = psi.clone();
        for _ in 0..100 {
            let n = model.sample_noise(1e-2, &mut rng);
            s = model.imaginary_step(&s, 1e-2, &n).unwrap();
        }
        let p = s.populations();
        assert!((p[0] - 0.36).abs() < 1e-12 && (p[1] - 0.64).abs() < 1e-12);
    }

    #[test]
    fn cayley_step_is_unitary_with_hamiltonian() {
        let model = CollapseSdeModel::generic(HermitianOperator::sigma_x(), vec![HermitianOperator::sigma_z()], 1.0, 1.0).unwrap();
        let psi = StateVector::abstract_from(&[c(0.6), c(0.8)]).unwrap();
        let out = model.imaginary_step(&psi, 0.1, &NoiseIncrement(DVector::from_element(1, 0.2))).unwrap();
        assert!((out.norm_sq() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn csl_grid_factor_reproduces_covariance() {
        let g = Grid1D::symmetric(2.0, 81).unwrap();
        let xs = g.points();
        let cov = DMatrix::from_fn(81, 81, |j, k| spatial_correlator(xs[j], xs[k], 0.2));
        let f = covariance_factor(&cov).unwrap();
        assert!((&f * f.transpose() - cov).amax() < 1e-12);
        assert!(f.ncols() < 81);
    }

    #[test]
    fn covariance_must_be_psd() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(covariance_factor(&bad), Err(Error::NotPositiveSemidefinite(_))));
    }

    #[test]
    fn eigenstate_variance_is_zero() {
        let model = spin_model(1.0);
        let up = StateVector::abstract_from(&[c(1.0), c(0.0)]).unwrap();
        let plan = RunPlan::new(1e-3, 50, 10, false).unwrap();
        let obs = [("sz".to_string(), HermitianOperator::sigma_z())];
        let rec = simulate_sde_trajectory(&model, &up, &plan, Scheme::Ito, &obs, 1, 0).unwrap();
        assert!(rec.observables[0].variance.iter().all(|&v| v == 0.0));
        assert_eq!(rec.times.len(), 6);
    }
}
