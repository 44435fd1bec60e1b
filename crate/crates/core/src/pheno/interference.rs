// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_positive, CslParams, Variant};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, integrate_pieces, QuadOptions};
use crate::quantum::Grid1D;

const DECAY_REL_TOL: f64 = 1e-11;
const NODES_PER_PANEL: usize = 16;
const MAX_PANELS: usize = 200_000;

fn norm_sq(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// `int_0^t (1 - exp(-|q - k s/m|^2 / 4 r^2)) ds`.
fn collapse_loss(k: [f64; 3], q: [f64; 3], t: f64, m: f64, r: f64) -> Result<f64> {
    let k2 = norm_sq(k);
    let g = |s: f64| {
        let d = [q[0] - k[0] * s / m, q[1] - k[1] * s / m, q[2] - k[2] * s / m];
        -(-norm_sq(d) / (4.0 * r * r)).exp_m1()
    };
    let mut pts = vec![0.0, t];
    if k2 > 0.0 {
        let center = m * (q[0] * k[0] + q[1] * k[1] + q[2] * k[2]) / k2;
        let width = 2.0 * r * m / k2.sqrt();
        for off in [-8.0, -2.0, 0.0, 2.0, 8.0] {
            let s = center + off * width;
            if s > 0.0 && s < t {
                pts.push(s);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    let opts = QuadOptions {
        rel_tol: DECAY_REL_TOL,
        abs_tol: 1e-300,
        max_intervals: 4000,
    };
    Ok(integrate_pieces(&g, &pts, opts)?.value)
}

/// Interferometric decay factor `F(k, q, t)` for a free particle of mass `m`; `k` is the
/// momentum-like Fourier variable (kg m/s) and `q = x - y` (m).
pub fn interference_decay(
    k: [f64; 3],
    q: [f64; 3],
    t: f64,
    m: f64,
    params: &CslParams,
    variant: &Variant,
    consts: &PhysicalConstants,
) -> Result<f64> {
    Ok((-interference_exponent(k, q, t, m, params, variant, consts)?).exp())
}

/// `-ln F(k, q, t)`, see [`interference_decay`].
pub fn interference_exponent(
    k: [f64; 3],
    q: [f64; 3],
    t: f64,
    m: f64,
    params: &CslParams,
    variant: &Variant,
    consts: &PhysicalConstants,
) -> Result<f64> {
    params.validate()?;
    variant.validate()?;
    check_positive("mass", m)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    if params.lambda == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let rate = params.lambda * (m / consts.m0).powi(2);
    let r = params.r_c;
    match variant {
        Variant::White => Ok(rate * collapse_loss(k, q, t, m, r)?),
        Variant::Colored { spectrum } => {
            let white = rate * collapse_loss(k, q, t, m, r)?;
            let end = [q[0] - k[0] * t / m, q[1] - k[1] * t / m, q[2] - k[2] * t / m];
            let bracket = (-norm_sq(end) / (4.0 * r * r)).exp() - (-norm_sq(q) / (4.0 * r * r)).exp();
            Ok(white - 0.5 * params.lambda * spectrum.tau_bar(t)? * bracket)
        }
        Variant::Dissipative { chi } => {
            let kappa = norm_sq(k) * (r * chi / consts.hbar).powi(2);
            let loss = collapse_loss(k, q, t, m, r * (1.0 + chi))?;
            Ok(rate * (t * -(-kappa).exp_m1() + (-kappa).exp() * loss))
        }
    }
}

/// Free evolution of an equal-weight superposition of two Gaussian packets of width
/// `width` centered at `+-separation/2`, observed after `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoPacketSource {
    pub mass: f64,
    pub separation: f64,
    pub width: f64,
    pub time: f64,
}

struct GaussTerm {
    weight: Complex64,
    alpha: f64,
    beta: Complex64,
    gamma: Complex64,
}

impl TwoPacketSource {
    pub fn validate(&self) -> Result<()> {
        check_positive("mass", self.mass)?;
        check_positive("packet width", self.width)?;
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::InvalidParameter("separation must be >= 0".into()));
        }
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(Error::InvalidParameter("time must be >= 0".into()));
        }
        Ok(())
    }

    fn spread(&self, hbar: f64) -> Complex64 {
        Complex64::new(1.0, hbar * self.time / (2.0 * self.mass * self.width * self.width))
    }

    fn terms(&self, hbar: f64) -> Vec<GaussTerm> {
        let s2 = self.width * self.width;
        let u = self.spread(hbar);
        let amp_sq = 1.0 / ((2.0 * std::f64::consts::PI * s2).sqrt() * u.norm());
        let c2 = 1.0 / (2.0 * (1.0 + (-self.separation * self.separation / (8.0 * s2)).exp()));
        let a = 1.0 / (4.0 * s2 * u.conj());
        let b = 1.0 / (4.0 * s2 * u);
        let alpha = (a + b).re;
        let centers = [-0.5 * self.separation, 0.5 * self.separation];
        let mut out = Vec::with_capacity(4);
        for &xj in &centers {
            for &xl in &centers {
                out.push(GaussTerm {
                    weight: Complex64::new(c2 * amp_sq * (std::f64::consts::PI / alpha).sqrt(), 0.0),
                    alpha,
                    beta: 2.0 * (a * xj + b * xl),
                    gamma: -(a * xj * xj + b * xl * xl),
                });
            }
        }
        out
    }

    /// Quantum-mechanical position density `rho_QM(x, x)`.
    pub fn density(&self, x: f64, hbar: f64) -> f64 {
        let s2 = self.width * self.width;
        let u = self.spread(hbar);
        let norm = (2.0 * std::f64::consts::PI * s2).powf(-0.25) / u.sqrt();
        let c = (2.0 * (1.0 + (-self.separation * self.separation / (8.0 * s2)).exp())).sqrt().recip();
        let g = |x0: f64| norm * (-(x - x0) * (x - x0) / (4.0 * s2 * u)).exp();
        (c * (g(-0.5 * self.separation) + g(0.5 * self.separation))).norm_sqr()
    }

    /// `int exp(-i kappa x) rho_QM(x, x) dx`.
    fn characteristic(&self, terms: &[GaussTerm], kappa: f64) -> Complex64 {
        terms
            .iter()
            .map(|t| {
                let shifted = t.beta - Complex64::new(0.0, kappa);
                t.weight * (shifted * shifted / (4.0 * t.alpha) + t.gamma).exp()
            })
            .sum()
    }
}

/// Position pattern of [`free_density_1d`] together with its collapse-free reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeDensityPattern {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub reference: Vec<f64>,
}

fn contrast(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    if max + min > 0.0 {
        (max - min) / (max + min)
    } else {
        0.0
    }
}

impl FreeDensityPattern {
    /// `(max - min) / (max + min)` over the sampled window.
    pub fn visibility(&self) -> f64 {
        contrast(&self.density)
    }

    pub fn reference_visibility(&self) -> f64 {
        contrast(&self.reference)
    }
}

/// Diagonal `rho(x, x, tau)` of a freely evolving two-packet superposition under collapse
/// noise, in one dimension. The z-integral of the convolution is taken analytically on the
/// Gaussian source, leaving the momentum integral to composite Gauss-Legendre quadrature
/// with the decay factor evaluated by adaptive quadrature at each node.
pub fn free_density_1d(
    source: &TwoPacketSource,
    grid: &Grid1D,
    params: &CslParams,
    variant: &Variant,
    consts: &PhysicalConstants,
) -> Result<FreeDensityPattern> {
    source.validate()?;
    params.validate()?;
    let hbar = consts.hbar;
    let x = grid.points();
    let reference: Vec<f64> = x.iter().map(|&xi| source.density(xi, hbar)).collect();
    let terms = source.terms(hbar);

    let alpha = terms[0].alpha;
    let spread = (160.0 * alpha).sqrt();
    let kappa_max = terms.iter().map(|t| t.beta.im.abs()).fold(0.0, f64::max) + spread;
    let reach = x.iter().map(|v| v.abs()).fold(0.0, f64::max) + 1.0 / alpha.sqrt();
    let mut panel = (0.25 * alpha.sqrt()).min(0.5 / reach);
    if params.lambda > 0.0 && source.time > 0.0 {
        let decay_scale = 2.0 * source.mass * params.r_c / (hbar * source.time);
        panel = panel.min(0.5 * decay_scale);
    }
    let panels = (kappa_max / panel).ceil() as usize;
    if panels > MAX_PANELS {
        return Err(Error::InvalidParameter(format!(
            "momentum integral needs {panels} panels; reduce the window or the evolution time"
        )));
    }
    let panel = kappa_max / panels as f64;
    let (gx, gw) = gauss_legendre(NODES_PER_PANEL);
    let mut nodes = Vec::with_capacity(panels * NODES_PER_PANEL);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * panel;
        for (xi, wi) in gx.iter().zip(&gw) {
            let kappa = mid + 0.5 * panel * xi;
            let f = interference_decay([hbar * kappa, 0.0, 0.0], [0.0; 3], source.time, source.mass, params, variant, consts)?;
            nodes.push((kappa, 0.5 * panel * wi * f, source.characteristic(&terms, kappa)));
        }
    }
    let density = x
        .iter()
        .map(|&xi| {
            let s: f64 = nodes
                .iter()
                .map(|(kappa, w, chi)| w * (Complex64::from_polar(1.0, kappa * xi) * chi).re)
                .sum();
            s / std::f64::consts::PI
        })
        .collect();
    Ok(FreeDensityPattern {
        x,
        density,
        reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pheno::NoiseSpectrum;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::codata()
    }

    #[test]
    fn trivial_cases_give_unity() {
        let c = consts();
        let p = CslParams::new(1e-8, 1e-7).unwrap();
        let m = 1e4 * c.m0;
        let k = [1e-27, 0.0, 0.0];
        let q = [1e-6, 0.0, 0.0];
        assert_eq!(interference_decay(k, q, 0.0, m, &p, &Variant::White, &c).unwrap(), 1.0);
        assert_eq!(interference_decay(k, q, 1.0, m, &p.with_lambda(0.0), &Variant::White, &c).unwrap(), 1.0);
        assert_eq!(interference_decay([0.0; 3], [0.0; 3], 1.0, m, &p, &Variant::White, &c).unwrap(), 1.0);
    }

    #[test]
    fn static_separation_matches_closed_form() {
        let c = consts();
        let p = CslParams::new(1e-6, 1e-7).unwrap();
        let m = 1e3 * c.m0;
        let d = 2e-7;
        let t = 0.5;
        let f = interference_decay([0.0; 3], [d, 0.0, 0.0], t, m, &p, &Variant::White, &c).unwrap();
        let expected = (-p.lambda * 1e6 * t * (1.0 - (-d * d / (4.0 * p.r_c * p.r_c)).exp())).exp();
        assert!((f / expected - 1.0).abs() < 1e-10);
    }

    #[test]
    fn moving_component_matches_erf_form() {
        let c = consts();
        let p = CslParams::new(1e-3, 1e-7).unwrap();
        let m = 100.0 * c.m0;
        let t = 1e-3;
        let k = 1e-27;
        let q = 5e-8;
        let f = interference_decay([k, 0.0, 0.0], [q, 0.0, 0.0], t, m, &p, &Variant::White, &c).unwrap();
        let r = p.r_c;
        let a = k / (2.0 * m * r);
        let integral = std::f64::consts::PI.sqrt() / (2.0 * a) * (libm::erf(a * t - q / (2.0 * r)) + libm::erf(q / (2.0 * r)));
        let expected = (-p.lambda * 1e4 * (t - integral)).exp();
        assert!((f / expected - 1.0).abs() < 1e-9);
    }

    #[test]
    fn variant_limits() {
        let c = consts();
        let p = CslParams::new(1e-4, 1e-7).unwrap();
        let m = 1e4 * c.m0;
        let (k, q, t) = ([2e-28, 0.0, 0.0], [3e-7, 0.0, 0.0], 0.1);
        let white = interference_decay(k, q, t, m, &p, &Variant::White, &c).unwrap();
        let diss = interference_decay(k, q, t, m, &p, &Variant::Dissipative { chi: 0.0 }, &c).unwrap();
        assert!((diss / white - 1.0).abs() < 1e-12);
        let colored = Variant::Colored {
            spectrum: NoiseSpectrum::exponential(1e12).unwrap(),
        };
        let col = interference_decay(k, q, t, m, &p, &colored, &c).unwrap();
        assert!((col / white - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_lambda_pattern_reproduces_analytic_density() {
        let c = consts();
        let src = TwoPacketSource {
            mass: 1e4 * c.m0,
            separation: 5e-7,
            width: 5e-8,
            time: 1e-2,
        };
        let grid = Grid1D::symmetric(1.5e-6, 61).unwrap();
        let pat = free_density_1d(&src, &grid, &CslParams::new(0.0, 1e-7).unwrap(), &Variant::White, &c).unwrap();
        let peak = pat.reference.iter().cloned().fold(0.0, f64::max);
        for (a, b) in pat.density.iter().zip(&pat.reference) {
            assert!((a - b).abs() < 1e-6 * peak, "{a} {b}");
        }
        let norm: f64 = pat.reference.iter().sum::<f64>() * grid.dx();
        assert!(norm > 0.5);
    }

    #[test]
    fn visibility_drops_with_lambda() {
        let c = consts();
        let src = TwoPacketSource {
            mass: 1e4 * c.m0,
            separation: 5e-7,
            width: 5e-8,
            time: 1e-2,
        };
        let grid = Grid1D::symmetric(4e-7, 41).unwrap();
        let vis: Vec<f64> = [0.0, 1e-7, 1e-6]
            .iter()
            .map(|&l| {
                let p = CslParams::new(l, 1e-7).unwrap();
                free_density_1d(&src, &grid, &p, &Variant::White, &c).unwrap().visibility()
            })
            .collect();
        assert!(vis[0] - vis[1] > 1e-4, "{vis:?}");
        assert!(vis[1] > vis[2]);
    }
}
