// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! GRW dynamics: Poisson-timed localizations interleaved with exact unitary evolution,
//! and the matching master equation.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{c, von_neumann, CMatrix, CVector, UnitaryPropagator};
use crate::quantum::{spatial_correlator, Basis, DensityMatrix, Grid1D, HermitianOperator, StateVector};

const MIN_LOCALIZED_NORM: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrwParams {
    pub lambda: f64,
    pub r_c: f64,
}

impl GrwParams {
    pub fn new(lambda: f64, r_c: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        if !(r_c > 0.0 && r_c.is_finite()) {
            return Err(Error::InvalidParameter(format!("r_C must be > 0, got {r_c}")));
        }
        Ok(Self { lambda, r_c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub particle: usize,
    pub a: f64,
}

/// `(pi r_C^2)^{-1/4} exp(-(x - a)^2 / 2 r_C^2)`.
#[inline]
pub fn localization_amplitude(x: f64, a: f64, r_c: f64) -> f64 {
    let u = x - a;
    (std::f64::consts::PI * r_c * r_c).powf(-0.25) * (-u * u / (2.0 * r_c * r_c)).exp()
}

/// Diagonal of the localization operator `L_a` on `grid`.
pub fn localization_operator(grid: &Grid1D, a: f64, r_c: f64) -> Result<Vec<f64>> {
    if !(r_c > 0.0) {
        return Err(Error::InvalidParameter(format!("r_C must be > 0, got {r_c}")));
    }
    if !grid.contains(a) {
        return Err(Error::OutsideGrid(a));
    }
    Ok(grid.points().into_iter().map(|x| localization_amplitude(x, a, r_c)).collect())
}

fn require_grid(psi: &StateVector) -> Result<Grid1D> {
    psi.basis()
        .grid()
        .copied()
        .ok_or_else(|| Error::InvalidParameter("state is not defined on a grid".into()))
}

/// `P(a) = ||L_a psi||^2` for a normalized grid state.
pub fn collapse_probability_density(psi: &StateVector, a: f64, params: &GrwParams) -> Result<f64> {
    let grid = require_grid(psi)?;
    psi.require_normalized()?;
    Ok(grid
        .points()
        .into_iter()
        .zip(psi.amplitudes().iter())
        .map(|(x, v)| localization_amplitude(x, a, params.r_c).powi(2) * v.norm_sqr())
        .sum::<f64>()
        * grid.dx())
}

/// `L_a psi / ||L_a psi||`.
pub fn apply_localization(psi: &StateVector, a: f64, params: &GrwParams) -> Result<StateVector> {
    let grid = require_grid(psi)?;
    let amps = CVector::from_iterator(
        grid.len(),
        grid.points()
            .into_iter()
            .zip(psi.amplitudes().iter())
            .map(|(x, v)| v * localization_amplitude(x, a, params.r_c)),
    );
    localize_diagonal(amps, *psi.basis())
}

fn localize_diagonal(amps: CVector, basis: Basis) -> Result<StateVector> {
    let norm = (amps.norm_squared() * basis.weight()).sqrt();
    if !(norm > MIN_LOCALIZED_NORM) {
        return Err(Error::VanishingNorm(norm));
    }
    StateVector::new(amps / c(norm), basis)
}

/// Off-diagonal decay rate of an `N`-particle cat state with branch separation `d`.
pub fn cat_state_decay_rate(n_particles: usize, d: f64, params: &GrwParams) -> f64 {
    n_particles as f64 * params.lambda * (1.0 - spatial_correlator(d, 0.0, params.r_c))
}

/// Where and how the localization of one particle acts on a state space.
pub trait Localizer: Sync {
    fn dim(&self) -> usize;
    fn particles(&self) -> usize;
    fn r_c(&self) -> f64;

    /// Draws a center from `P(a)` for `particle` and returns it with the collapsed state.
    fn localize<R: Rng + ?Sized>(&self, psi: &StateVector, particle: usize, rng: &mut R) -> Result<(f64, StateVector)>
    where
        Self: Sized;

    /// `K_jk = int da L_a(j) L_a(k)` for the given particle.
    fn kernel(&self, particle: usize) -> CMatrix;
}

/// Single particle on a 1D grid; the `a`-integral is a Riemann sum on the grid spacing
/// extended by `8 r_C` past both ends.
#[derive(Debug, Clone)]
pub struct GridLocalizer {
    grid: Grid1D,
    r_c: f64,
    nodes: Vec<f64>,
}

impl GridLocalizer {
    pub fn new(grid: Grid1D, r_c: f64) -> Result<Self> {
        if !(r_c > 0.0) {
            return Err(Error::InvalidParameter(format!("r_C must be > 0, got {r_c}")));
        }
        grid.require_resolution(r_c)?;
        grid.require_half_span(8.0 * r_c)?;
        let dx = grid.dx();
        let pad = (8.0 * r_c / dx).ceil() as usize;
        let start = grid.x_min() - pad as f64 * dx;
        let nodes = (0..grid.len() + 2 * pad).map(|k| start + k as f64 * dx).collect();
        Ok(Self { grid, r_c, nodes })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `P(a)` at every quadrature node.
    pub fn density_on_nodes(&self, psi: &StateVector) -> Vec<f64> {
        let dx = self.grid.dx();
        let xs = self.grid.points();
        let pops: Vec<f64> = psi.amplitudes().iter().map(|v| v.norm_sqr() * dx).collect();
        self.nodes
            .iter()
            .map(|&a| {
                xs.iter()
                    .zip(&pops)
                    .map(|(&x, p)| localization_amplitude(x, a, self.r_c).powi(2) * p)
                    .sum()
            })
            .collect()
    }

    fn sample_center<R: Rng + ?Sized>(&self, psi: &StateVector, rng: &mut R) -> f64 {
        let p = self.density_on_nodes(psi);
        let h = self.grid.dx();
        let mut cdf = Vec::with_capacity(p.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in p.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * h;
            cdf.push(acc);
        }
        let u: f64 = rng.gen::<f64>() * acc;
        let k = cdf.partition_point(|&v| v < u).clamp(1, cdf.len() - 1);
        let (c0, c1) = (cdf[k - 1], cdf[k]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.nodes[k - 1] + frac * h
    }
}

impl Localizer for GridLocalizer {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn particles(&self) -> usize {
        1
    }

    fn r_c(&self) -> f64 {
        self.r_c
    }

    fn localize<R: Rng + ?Sized>(&self, psi: &StateVector, _particle: usize, rng: &mut R) -> Result<(f64, StateVector)> {
        let a = self.sample_center(psi, rng);
        let params = GrwParams { lambda: 0.0, r_c: self.r_c };
        Ok((a, apply_localization(psi, a, &params)?))
    }

    fn kernel(&self, _particle: usize) -> CMatrix {
        let n = self.grid.len();
        let xs = self.grid.points();
        let h = self.grid.dx();
        let table: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .map(|&a| xs.iter().map(|&x| localization_amplitude(x, a, self.r_c)).collect())
            .collect();
        let mut k = CMatrix::zeros(n, n);
        for j in 0..n {
            for l in j..n {
                let v: f64 = table.iter().map(|row| row[j] * row[l]).sum::<f64>() * h;
                k[(j, l)] = c(v);
                k[(l, j)] = c(v);
            }
        }
        k
    }
}

/// `N` point particles, each either at `-d/2` or `+d/2`; the state space is spanned by
/// the `2^N` configurations (bit `i` set means particle `i` is on the right).
#[derive(Debug, Clone)]
pub struct PacketRegister {
    particles: usize,
    separation: f64,
    r_c: f64,
}

impl PacketRegister {
    pub fn new(particles: usize, separation: f64, r_c: f64) -> Result<Self> {
        if particles == 0 || particles > 12 {
            return Err(Error::InvalidParameter(format!(
                "register supports 1..=12 particles, got {particles}"
            )));
        }
        if !(r_c > 0.0) || !(separation >= 0.0) {
            return Err(Error::InvalidParameter("r_C must be > 0 and separation >= 0".into()));
        }
        Ok(Self {
            particles,
            separation,
            r_c,
        })
    }

    fn position(&self, config: usize, particle: usize) -> f64 {
        if config >> particle & 1 == 1 {
            0.5 * self.separation
        } else {
            -0.5 * self.separation
        }
    }

    /// Product state `(|L> cos t_i + |R> e^{i phi_i} sin t_i)` over particles.
    pub fn product_state(&self, factors: &[[num_complex::Complex64; 2]]) -> Result<StateVector> {
        if factors.len() != self.particles {
            return Err(Error::DimensionMismatch {
                expected: self.particles,
                actual: factors.len(),
            });
        }
        let amps = CVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|cfg| {
                factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| f[cfg >> i & 1])
                    .product::<num_complex::Complex64>()
            }),
        );
        StateVector::normalized_from(amps, Basis::Abstract)
    }
}

fn sample_two_branch<R: Rng + ?Sized>(p_left: f64, x_left: f64, x_right: f64, r_c: f64, rng: &mut R) -> f64 {
    let center = if rng.gen::<f64>() < p_left { x_left } else { x_right };
    let z: f64 = StandardNormal.sample(rng);
    center + z * r_c / std::f64::consts::SQRT_2
}

impl Localizer for PacketRegister {
    fn dim(&self) -> usize {
        1 << self.particles
    }

    fn particles(&self) -> usize {
        self.particles
    }

    fn r_c(&self) -> f64 {
        self.r_c
    }

    fn localize<R: Rng + ?Sized>(&self, psi: &StateVector, particle: usize, rng: &mut R) -> Result<(f64, StateVector)> {
        let p_left: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(cfg, _)| cfg >> particle & 1 == 0)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        let h = 0.5 * self.separation;
        let a = sample_two_branch(p_left, -h, h, self.r_c, rng);
        let amps = CVector::from_iterator(
            self.dim(),
            psi.amplitudes()
                .iter()
                .enumerate()
                .map(|(cfg, v)| v * localization_amplitude(self.position(cfg, particle), a, self.r_c)),
        );
        Ok((a, localize_diagonal(amps, Basis::Abstract)?))
    }

    fn kernel(&self, particle: usize) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |j, k| {
            c(spatial_correlator(
                self.position(j, particle),
                self.position(k, particle),
                self.r_c,
            ))
        })
    }
}

/// Two-branch cat `alpha |L...L> + beta |R...R>` of `N` particles.
#[derive(Debug, Clone)]
pub struct CatBranches {
    particles: usize,
    separation: f64,
    r_c: f64,
}

impl CatBranches {
    pub fn new(particles: usize, separation: f64, r_c: f64) -> Result<Self> {
        if particles == 0 || !(r_c > 0.0) || !(separation >= 0.0) {
            return Err(Error::InvalidParameter(
                "cat requires N >= 1, r_C > 0 and separation >= 0".into(),
            ));
        }
        Ok(Self {
            particles,
            separation,
            r_c,
        })
    }
}

impl Localizer for CatBranches {
    fn dim(&self) -> usize {
        2
    }

    fn particles(&self) -> usize {
        self.particles
    }

    fn r_c(&self) -> f64 {
        self.r_c
    }

    fn localize<R: Rng + ?Sized>(&self, psi: &StateVector, _particle: usize, rng: &mut R) -> Result<(f64, StateVector)> {
        let amps = psi.amplitudes();
        let h = 0.5 * self.separation;
        let a = sample_two_branch(amps[0].norm_sqr(), -h, h, self.r_c, rng);
        let out = CVector::from_column_slice(&[
            amps[0] * localization_amplitude(-h, a, self.r_c),
            amps[1] * localization_amplitude(h, a, self.r_c),
        ]);
        Ok((a, localize_diagonal(out, Basis::Abstract)?))
    }

    fn kernel(&self, _particle: usize) -> CMatrix {
        let g = c(spatial_correlator(self.separation, 0.0, self.r_c));
        CMatrix::from_row_slice(2, 2, &[c(1.0), g, g, c(1.0)])
    }
}

/// `-(i/hbar)[H, rho] + lambda sum_i (K_i o rho - rho)` with `o` the elementwise product.
pub fn grw_master_rhs<L: Localizer>(
    rho: &CMatrix,
    h: &HermitianOperator,
    params: &GrwParams,
    localizer: &L,
    hbar: f64,
) -> Result<CMatrix> {
    let kernels: Vec<CMatrix> = (0..localizer.particles()).map(|i| localizer.kernel(i)).collect();
    grw_master_rhs_with(rho, h, params.lambda, &kernels, hbar)
}

/// As [`grw_master_rhs`] with precomputed kernels.
pub fn grw_master_rhs_with(
    rho: &CMatrix,
    h: &HermitianOperator,
    lambda: f64,
    kernels: &[CMatrix],
    hbar: f64,
) -> Result<CMatrix> {
    let d = rho.nrows();
    if h.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: h.dim(),
        });
    }
    let mut out = von_neumann(h.matrix(), rho, hbar);
    if lambda == 0.0 {
        return Ok(out);
    }
    for k in kernels {
        if k.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: k.nrows(),
            });
        }
        out += (k.component_mul(rho) - rho) * c(lambda);
    }
    Ok(out)
}

/// One GRW trajectory: final state, jumps, and snapshots at the requested times.
#[derive(Debug, Clone)]
pub struct GrwTrajectory {
    pub jumps: Vec<JumpEvent>,
    pub snapshots: Vec<StateVector>,
    pub final_state: StateVector,
}

/// Reusable GRW integrator for a fixed Hamiltonian and localizer.
#[derive(Debug, Clone)]
pub struct GrwSimulator<L: Localizer> {
    params: GrwParams,
    propagator: UnitaryPropagator,
    localizer: L,
}

impl<L: Localizer> GrwSimulator<L> {
    pub fn new(h: &HermitianOperator, params: GrwParams, localizer: L, hbar: f64) -> Result<Self> {
        if h.dim() != localizer.dim() {
            return Err(Error::DimensionMismatch {
                expected: localizer.dim(),
                actual: h.dim(),
            });
        }
        if (params.r_c - localizer.r_c()).abs() > 1e-12 * params.r_c {
            return Err(Error::InvalidParameter("localizer r_C differs from GRW parameters".into()));
        }
        Ok(Self {
            params,
            propagator: UnitaryPropagator::new(h.matrix(), hbar),
            localizer,
        })
    }

    pub fn localizer(&self) -> &L {
        &self.localizer
    }

    pub fn params(&self) -> &GrwParams {
        &self.params
    }

    fn evolve(&self, psi: &StateVector, dt: f64) -> Result<StateVector> {
        StateVector::new(self.propagator.apply(psi.amplitudes(), dt), *psi.basis())
    }

    /// Runs until `t_final`; `sample_times` must be sorted within `[0, t_final]`.
    pub fn run<R: Rng + ?Sized>(
        &self,
        psi0: &StateVector,
        t_final: f64,
        sample_times: &[f64],
        rng: &mut R,
    ) -> Result<GrwTrajectory> {
        if !(t_final > 0.0) {
            return Err(Error::InvalidParameter(format!("duration must be > 0, got {t_final}")));
        }
        if psi0.amplitudes().len() != self.localizer.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.localizer.dim(),
                actual: psi0.amplitudes().len(),
            });
        }
        psi0.require_normalized()?;
        if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.iter().any(|&s| s < 0.0 || s > t_final) {
            return Err(Error::InvalidParameter("sample times must be sorted within [0, T]".into()));
        }
        let total_rate = self.params.lambda * self.localizer.particles() as f64;
        let waiting = if total_rate > 0.0 { Some(Exp::new(total_rate).map_err(|e| Error::InvalidParameter(e.to_string()))?) } else { None };

        let mut psi = psi0.clone();
        let mut t = 0.0;
        let mut jumps = Vec::new();
        let mut snapshots = Vec::with_capacity(sample_times.len());
        let mut next_sample = 0;
        loop {
            let t_jump = match &waiting {
                Some(w) => t + w.sample(rng),
                None => f64::INFINITY,
            };
            while next_sample < sample_times.len() && sample_times[next_sample] <= t_jump.min(t_final) {
                snapshots.push(self.evolve(&psi, sample_times[next_sample] - t)?);
                next_sample += 1;
            }
            if t_jump > t_final {
                psi = self.evolve(&psi, t_final - t)?;
                break;
            }
            psi = self.evolve(&psi, t_jump - t)?;
            t = t_jump;
            let particle = if self.localizer.particles() > 1 {
                rng.gen_range(0..self.localizer.particles())
            } else {
                0
            };
            let (a, next) = self.localizer.localize(&psi, particle, rng)?;
            psi = next;
            jumps.push(JumpEvent { time: t, particle, a });
        }
        Ok(GrwTrajectory {
            jumps,
            snapshots,
            final_state: psi,
        })
    }
}

/// Convenience wrapper: one trajectory with a fresh propagator.
pub fn simulate_grw_trajectory<L: Localizer, R: Rng + ?Sized>(
    psi0: &StateVector,
    h: &HermitianOperator,
    params: GrwParams,
    localizer: L,
    t_final: f64,
    hbar: f64,
    rng: &mut R,
) -> Result<GrwTrajectory> {
    GrwSimulator::new(h, params, localizer, hbar)?.run(psi0, t_final, &[], rng)
}

/// Partial trace over `particle` of an `n`-particle two-mode register density matrix.
pub fn trace_out_particle(rho: &CMatrix, particles: usize, particle: usize) -> CMatrix {
    let reduced = 1usize << (particles - 1);
    let low = (1usize << particle) - 1;
    let expand = |r: usize, bit: usize| (r & low) | (bit << particle) | ((r & !low) << 1);
    CMatrix::from_fn(reduced, reduced, |j, k| {
        rho[(expand(j, 0), expand(k, 0))] + rho[(expand(j, 1), expand(k, 1))]
    })
}

/// Ensemble density matrix of the snapshots taken at sample index `k`.
pub fn ensemble_density(trajectories: &[GrwTrajectory], k: usize) -> Result<DensityMatrix> {
    DensityMatrix::from_ensemble(trajectories.iter().map(|t| &t.snapshots[k]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{QuantumState, StateVector};
    use crate::rng::stream;

    fn setup() -> (Grid1D, GrwParams) {
        (Grid1D::symmetric(3.0, 241).unwrap(), GrwParams::new(1.0, 0.2).unwrap())
    }

    #[test]
    fn localization_peak_and_symmetry() {
        let g = Grid1D::symmetric(1.0, 201).unwrap();
        let l = localization_operator(&g, 0.0, 0.1).unwrap();
        let peak = (std::f64::consts::PI * 0.01).powf(-0.25);
        assert!((l[100] - peak).abs() < 1e-14 * peak);
        for j in 0..201 {
            assert_eq!(l[j], l[200 - j]);
        }
        assert!(matches!(localization_operator(&g, 2.0, 0.1), Err(Error::OutsideGrid(_))));
    }

    #[test]
    fn kernel_matches_gaussian_product_integral() {
        let (g, p) = setup();
        let k = GridLocalizer::new(g, p.r_c).unwrap().kernel(0);
        let xs = g.points();
        for &(j, l) in &[(120, 120), (120, 125), (100, 140), (0, 240), (3, 17)] {
            let exact = spatial_correlator(xs[j], xs[l], p.r_c);
            assert!((k[(j, l)].re - exact).abs() < 1e-8, "{j} {l}");
        }
    }

    #[test]
    fn probability_density_integrates_to_one() {
        let (g, p) = setup();
        let psi = StateVector::two_packets(&g, 2.0, 0.05).unwrap();
        let loc = GridLocalizer::new(g, p.r_c).unwrap();
        let dens = loc.density_on_nodes(&psi);
        let total: f64 = dens.iter().sum::<f64>() * g.dx();
        assert!((total - 1.0).abs() < 1e-6);
        let direct = collapse_probability_density(&psi, 1.0, &p).unwrap();
        let idx = loc.nodes().iter().position(|&a| (a - 1.0).abs() < 1e-9).unwrap();
        assert!((direct - dens[idx]).abs() < 1e-12 * direct);
    }

    #[test]
    fn localization_selects_a_branch() {
        let (g, p) = setup();
        let psi = StateVector::two_packets(&g, 2.0, 0.05).unwrap();
        let out = apply_localization(&psi, 1.0, &p).unwrap();
        let pops = out.populations();
        let left: f64 = pops[..120].iter().sum();
        assert!(left < (-(2.0f64).powi(2) / (2.0 * p.r_c * p.r_c)).exp());
        assert!(out.is_normalized());
    }

    #[test]
    fn vanishing_norm_is_an_error() {
        let g = Grid1D::symmetric(40.0, 801).unwrap();
        let psi = StateVector::gaussian_packets(&g, &[-30.0], 0.1, &[c(1.0)]).unwrap();
        let p = GrwParams::new(1.0, 0.2).unwrap();
        assert!(matches!(apply_localization(&psi, 30.0, &p), Err(Error::VanishingNorm(_))));
    }

    #[test]
    fn zero_rate_is_pure_unitary() {
        let h = HermitianOperator::sigma_x();
        let psi = StateVector::abstract_from(&[c(1.0), c(0.0)]).unwrap();
        let sim = GrwSimulator::new(&h, GrwParams::new(0.0, 1.0).unwrap(), CatBranches::new(1, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let tr = sim.run(&psi, 0.7, &[], &mut stream(1, 0)).unwrap();
        assert!(tr.jumps.is_empty());
        let sz = HermitianOperator::sigma_z();
        assert!((tr.final_state.expectation(&sz).unwrap() - (1.4f64).cos()).abs() < 1e-12);
    }

    #[test]
    fn master_rhs_preserves_populations_and_trace() {
        let (g, p) = setup();
        let loc = GridLocalizer::new(g, p.r_c).unwrap();
        let psi = StateVector::two_packets(&g, 1.0, 0.1).unwrap();
        let rho = psi.density();
        let h = HermitianOperator::zeros(g.len());
        let out = grw_master_rhs(rho.matrix(), &h, &p, &loc, 1.0).unwrap();
        for j in 0..g.len() {
            assert!(out[(j, j)].norm() < 1e-10);
        }
        let (j, k) = (100, 140);
        let rate = -(out[(j, k)] / rho.matrix()[(j, k)]).re;
        let d = g.point(k) - g.point(j);
        assert!((rate - cat_state_decay_rate(1, d, &p)).abs() < 1e-8);
    }

    #[test]
    fn cat_rate_limits() {
        let p = GrwParams::new(2.0, 1e-7).unwrap();
        assert_eq!(cat_state_decay_rate(5, 0.0, &p), 0.0);
        assert!((cat_state_decay_rate(5, 1e-4, &p) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn trace_out_keeps_product_factors() {
        let reg = PacketRegister::new(3, 1.0, 0.3).unwrap();
        let f = [[c(1.0), c(2.0)], [c(1.0), c(0.0)], [c(0.5), num_complex::Complex64::new(0.0, 1.0)]];
        let psi = reg.product_state(&f).unwrap();
        let rho = psi.density().into_matrix();
        let r = trace_out_particle(&rho, 3, 0);
        assert_eq!(r.nrows(), 4);
        assert!((crate::linalg::trace(&r).re - 1.0).abs() < 1e-14);
        assert!(r[(0, 0)].re > 0.0 && r[(1, 1)].norm() < 1e-15);
    }
}
