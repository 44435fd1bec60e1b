// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ensemble-level checks tying the stochastic engines to their master equations.

use collapse_lab::grw::{grw_master_rhs, trace_out_particle, GrwParams, GrwSimulator, Localizer, PacketRegister};
use collapse_lab::io::{self, TrajectoryConfig};
use collapse_lab::linalg::{c, trace_distance, CMatrix};
use collapse_lab::master::{lindblad_rhs, Convention, Rk4};
use collapse_lab::quantum::{HermitianOperator, StateVector};
use collapse_lab::sde::{simulate_sde_trajectory, CollapseSdeModel, RunPlan, Scheme};
use collapse_lab::{rng, stats, Complex64, PhysicalConstants};

fn spin_model(omega: f64) -> CollapseSdeModel {
    CollapseSdeModel::generic(HermitianOperator::sigma_x().scaled(0.5 * omega), vec![HermitianOperator::sigma_z()], 1.0, 1.0).unwrap()
}

fn tilted(theta: f64) -> StateVector {
    StateVector::abstract_from(&[c(theta.cos()), Complex64::new(0.0, theta.sin())]).unwrap()
}

/// Mean and per-entry standard error of a set of density matrices.
fn ensemble_stats(states: &[CMatrix]) -> (CMatrix, CMatrix) {
    let d = states[0].nrows();
    let mut mean = CMatrix::zeros(d, d);
    let mut err = CMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let re: Vec<f64> = states.iter().map(|s| s[(j, k)].re).collect();
            let im: Vec<f64> = states.iter().map(|s| s[(j, k)].im).collect();
            mean[(j, k)] = Complex64::new(stats::mean(&re), stats::mean(&im));
            err[(j, k)] = Complex64::new(stats::std_error(&re), stats::std_error(&im));
        }
    }
    (mean, err)
}

fn assert_within_band(mean: &CMatrix, err: &CMatrix, exact: &CMatrix, sigmas: f64) {
    for j in 0..mean.nrows() {
        for k in 0..mean.ncols() {
            let (m, e, x) = (mean[(j, k)], err[(j, k)], exact[(j, k)]);
            assert!((m.re - x.re).abs() <= sigmas * e.re + 1e-12, "re ({j},{k}): {} vs {} ± {}", m.re, x.re, e.re);
            assert!((m.im - x.im).abs() <= sigmas * e.im + 1e-12, "im ({j},{k}): {} vs {} ± {}", m.im, x.im, e.im);
        }
    }
}

fn sde_final_densities(model: &CollapseSdeModel, psi0: &StateVector, plan: &RunPlan, scheme: Scheme, n: usize, seed: u64) -> Vec<CMatrix> {
    (0..n)
        .map(|i| {
            let rec = simulate_sde_trajectory(model, psi0, plan, scheme, &[], seed, i as u64).unwrap();
            rec.snapshots.last().unwrap().density().into_matrix()
        })
        .collect()
}

#[test]
fn sde_trajectories_are_reproducible_from_seed() {
    let model = spin_model(1.0);
    let plan = RunPlan::new(1e-3, 400, 50, true).unwrap();
    let obs = vec![("sigma_z".to_string(), HermitianOperator::sigma_z())];
    let psi0 = tilted(0.4);
    let a = simulate_sde_trajectory(&model, &psi0, &plan, Scheme::Ito, &obs, 11, 3).unwrap();
    let b = simulate_sde_trajectory(&model, &psi0, &plan, Scheme::Ito, &obs, 11, 3).unwrap();
    let other = simulate_sde_trajectory(&model, &psi0, &plan, Scheme::Ito, &obs, 11, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.observables, other.observables);
    assert!(a.times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn grw_trajectories_are_reproducible_from_seed() {
    let reg = PacketRegister::new(2, 3.0, 1.0).unwrap();
    let sim = GrwSimulator::new(&HermitianOperator::zeros(4), GrwParams::new(1.0, 1.0).unwrap(), reg.clone(), 1.0).unwrap();
    let psi0 = reg.product_state(&[[c(1.0), c(1.0)], [c(1.0), c(0.5)]]).unwrap();
    let times = [0.5, 1.0, 2.0];
    let a = sim.run(&psi0, 2.0, &times, &mut rng::stream(5, 1)).unwrap();
    let b = sim.run(&psi0, 2.0, &times, &mut rng::stream(5, 1)).unwrap();
    assert_eq!(a.jumps, b.jumps);
    assert_eq!(a.final_state, b.final_state);
    assert!(a.jumps.windows(2).all(|w| w[1].time > w[0].time));
}

#[test]
fn grw_ensemble_matches_master_equation() {
    let reg = PacketRegister::new(1, 2.0, 1.0).unwrap();
    let h = HermitianOperator::sigma_x().scaled(0.7);
    let params = GrwParams::new(1.0, 1.0).unwrap();
    let sim = GrwSimulator::new(&h, params, reg.clone(), 1.0).unwrap();
    let psi0 = tilted(0.3);
    let t = 1.5;
    let n = 6000;
    let finals: Vec<CMatrix> = (0..n)
        .map(|i| sim.run(&psi0, t, &[], &mut rng::stream(77, i)).unwrap().final_state.density().into_matrix())
        .collect();
    let (mean, err) = ensemble_stats(&finals);
    let exact = Rk4::new(1e-3)
        .unwrap()
        .evolve(&psi0.density().into_matrix(), t, |_, r| grw_master_rhs(r, &h, &params, &reg, 1.0), |_, _| {})
        .unwrap();
    assert_within_band(&mean, &err, &exact, 4.0);
}

#[test]
fn ito_and_imaginary_noise_reproduce_the_lindblad_equation() {
    let model = spin_model(1.3);
    let psi0 = tilted(0.5);
    let plan = RunPlan::new(1e-3, 800, 800, true).unwrap();
    let t = 0.8;
    let exact = Rk4::new(1e-3)
        .unwrap()
        .evolve(
            &psi0.density().into_matrix(),
            t,
            |_, r| {
                lindblad_rhs(
                    r,
                    &HermitianOperator::sigma_x().scaled(0.65),
                    &[HermitianOperator::sigma_z()],
                    1.0,
                    Convention::HalfRate,
                    1.0,
                )
            },
            |_, _| {},
        )
        .unwrap();
    for (scheme, seed) in [(Scheme::Ito, 21), (Scheme::ImaginaryNoise, 22)] {
        let finals = sde_final_densities(&model, &psi0, &plan, scheme, 3000, seed);
        let (mean, err) = ensemble_stats(&finals);
        assert_within_band(&mean, &err, &exact, 4.0);
    }
}

#[test]
fn expectation_is_a_martingale_without_hamiltonian() {
    let model = spin_model(0.0);
    let plan = RunPlan::new(2e-3, 1000, 100, false).unwrap();
    let obs = vec![("sigma_z".to_string(), HermitianOperator::sigma_z())];
    let psi0 = tilted(0.6);
    let records: Vec<_> = (0..2000)
        .map(|i| simulate_sde_trajectory(&model, &psi0, &plan, Scheme::Ito, &obs, 31, i).unwrap())
        .collect();
    let start = records[0].observables[0].mean[0];
    for k in 0..records[0].times.len() {
        let xs: Vec<f64> = records.iter().map(|r| r.observables[0].mean[k]).collect();
        let (lo, hi) = stats::bootstrap_mean_band(&xs, 300, 0.99, 7 + k as u64);
        assert!(lo - 1e-12 <= start && start <= hi + 1e-12, "t index {k}: {start} outside [{lo}, {hi}]");
    }
}

#[test]
fn halving_the_step_stays_within_the_monte_carlo_band() {
    let model = spin_model(2.0);
    let psi0 = tilted(0.35);
    let obs = vec![("sigma_z".to_string(), HermitianOperator::sigma_z())];
    let run = |dt: f64, steps: usize, seed: u64| -> Vec<f64> {
        let plan = RunPlan::new(dt, steps, steps, false).unwrap();
        (0..3000)
            .map(|i| *simulate_sde_trajectory(&model, &psi0, &plan, Scheme::Ito, &obs, seed, i).unwrap().observables[0].mean.last().unwrap())
            .collect()
    };
    let coarse = run(4e-3, 250, 41);
    let fine = run(2e-3, 500, 42);
    let diff = (stats::mean(&coarse) - stats::mean(&fine)).abs();
    let band = 4.0 * stats::std_error(&coarse).hypot(stats::std_error(&fine));
    assert!(diff < band, "{diff} vs {band}");
}

#[test]
fn localizing_one_particle_leaves_the_others_alone() {
    let reg = PacketRegister::new(3, 4.0, 1.0).unwrap();
    let psi = reg
        .product_state(&[[c(1.0), c(1.0)], [c(0.3), Complex64::new(0.0, 0.9)], [c(0.8), c(-0.2)]])
        .unwrap();
    let before = trace_out_particle(&psi.density().into_matrix(), 3, 0);
    let mut r = rng::stream(3, 0);
    for _ in 0..20 {
        let (_, after) = reg.localize(&psi, 0, &mut r).unwrap();
        let reduced = trace_out_particle(&after.density().into_matrix(), 3, 0);
        assert!(trace_distance(&before, &reduced) < 1e-12);
    }
}

#[test]
fn two_master_seeds_agree_within_error_bars() {
    let consts = PhysicalConstants::codata();
    let cfg = TrajectoryConfig {
        ensemble: 400,
        steps: 1000,
        record_every: 250,
        duration: 2.0,
        ..TrajectoryConfig::default()
    };
    let a = io::run_ensemble(&cfg, 1, 1, &consts).unwrap().aggregate;
    let b = io::run_ensemble(&cfg, 2, 1, &consts).unwrap().aggregate;
    let (mean, se) = (a.column("sigma_z_mean").unwrap(), a.column("sigma_z_stderr").unwrap());
    for (ra, rb) in a.rows.iter().zip(&b.rows).skip(1) {
        let (ma, mb) = (ra[mean].as_f64().unwrap(), rb[mean].as_f64().unwrap());
        let band = 4.0 * ra[se].as_f64().unwrap().hypot(rb[se].as_f64().unwrap());
        assert!((ma - mb).abs() < band, "{ma} vs {mb} (band {band})");
        assert_ne!(ma, mb);
    }
}
