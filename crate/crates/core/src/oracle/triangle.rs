//! Randomized three-way comparison: closed form ↔ sideband solve ↔ time domain.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::time_domain::{integrate_linear, LinearDynamics, TimeDomainSettings};
use super::solve_sidebands;
use crate::error::Result;
use crate::params::{ProbeConfig, SystemParams};
use crate::response::ResponseModel;
use crate::steady::SteadyState;

/// Tolerances of the triangle.
pub const CLOSED_VS_LINEAR_TOL: f64 = 1e-9;
pub const TIME_VS_LINEAR_TOL: f64 = 1e-6;
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawSettings {
    pub draws: usize,
    pub seed: u64,
    /// How many of the draws also run the time-domain leg.
    pub time_domain_draws: usize,
    /// Phonon damping used by the time-domain leg, in units of ω_b.
    pub inflated_gamma_b: f64,
}

impl Default for DrawSettings {
    fn default() -> Self {
        DrawSettings {
            draws: 1000,
            seed: 7,
            time_domain_draws: 1000,
            inflated_gamma_b: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleReport {
    pub draws: usize,
    pub seed: u64,
    pub time_domain_draws: usize,
    pub max_rel_closed_vs_linear: f64,
    pub max_rel_time_vs_linear: f64,
    pub max_linear_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
struct Draw {
    params: SystemParams,
    steady: SteadyState,
    probe: ProbeConfig,
}

fn log_uniform<R: Rng>(rng: &mut R, center: f64) -> f64 {
    center * 10f64.powf(rng.random_range(-1.0..1.0))
}

fn pinned_state(g_eff: Complex64) -> SteadyState {
    let zero = Complex64::new(0.0, 0.0);
    SteadyState {
        m_s: zero,
        b_s: zero,
        c1_s: zero,
        c2_s: zero,
        delta_m: 0.0,
        delta_cavity: 0.0,
        g_eff,
        g_eff_pinned: true,
        iterations: 0,
        converged: true,
    }
}

/// Rates and couplings log-uniform within a decade of the reference values,
/// ξ ∈ [0, 2], φ ∈ [0, 2π), σ ∈ [−ω_b, ω_b].
fn draw_all(settings: &DrawSettings) -> Vec<Draw> {
    let base = SystemParams::default();
    let omega_b = base.omega_b;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    (0..settings.draws)
        .map(|_| {
            let params = SystemParams {
                kappa_x: log_uniform(&mut rng, base.kappa_x),
                kappa_y: log_uniform(&mut rng, base.kappa_y),
                kappa_m: log_uniform(&mut rng, base.kappa_m),
                gamma_b: log_uniform(&mut rng, base.gamma_b),
                coupling_gamma_1: log_uniform(&mut rng, base.coupling_gamma_1),
                coupling_gamma_2: log_uniform(&mut rng, base.coupling_gamma_2),
                ..base.clone()
            };
            let g = Complex64::from_polar(log_uniform(&mut rng, 0.32 * omega_b), rng.random_range(0.0..TAU));
            let probe = ProbeConfig::new(
                rng.random_range(0.0..TAU),
                rng.random_range(0.0..2.0),
                rng.random_range(-1.0..1.0) * omega_b,
            );
            Draw {
                params,
                steady: pinned_state(g),
                probe,
            }
        })
        .collect()
}

fn relative(a: Complex64, reference: Complex64) -> f64 {
    (a - reference).norm() / reference.norm()
}

#[derive(Debug, Default, Clone, Copy)]
struct DrawErrors {
    closed: f64,
    time: f64,
    residual: f64,
}

fn check(draw: &Draw, with_time_domain: bool, inflated_gamma_b: f64) -> Result<DrawErrors> {
    let linear = solve_sidebands(&draw.params, &draw.steady, &draw.probe)?;
    let closed = ResponseModel::new(&draw.params, &draw.steady).c1_plus(draw.probe.sigma, draw.probe.drive_ratio())?;
    let mut errors = DrawErrors {
        closed: relative(closed, linear.c1_plus),
        time: 0.0,
        residual: linear.relative_residual,
    };
    if with_time_domain {
        let params = SystemParams {
            gamma_b: inflated_gamma_b * draw.params.omega_b,
            ..draw.params.clone()
        };
        let reference = solve_sidebands(&params, &draw.steady, &draw.probe)?;
        let dynamics = LinearDynamics::new(&params, &draw.steady, &draw.probe);
        let settings = TimeDomainSettings::recommended(dynamics.fastest_frequency(), dynamics.slowest_decay());
        let td = integrate_linear(&dynamics, settings)?;
        errors.time = relative(td.c1_plus, reference.c1_plus);
        errors.residual = errors.residual.max(reference.relative_residual);
    }
    Ok(errors)
}

/// Runs the oracle triangle. Draws are evaluated in parallel; the report is
/// independent of the worker count.
pub fn run_triangle(settings: &DrawSettings) -> Result<TriangleReport> {
    let draws = draw_all(settings);
    let errors: Vec<DrawErrors> = draws
        .par_iter()
        .enumerate()
        .map(|(i, d)| check(d, i < settings.time_domain_draws, settings.inflated_gamma_b))
        .collect::<Result<_>>()?;
    let max = |f: fn(&DrawErrors) -> f64| errors.iter().map(f).fold(0.0, f64::max);
    let max_rel_closed_vs_linear = max(|e| e.closed);
    let max_rel_time_vs_linear = max(|e| e.time);
    let max_linear_residual = max(|e| e.residual);
    Ok(TriangleReport {
        draws: settings.draws,
        seed: settings.seed,
        time_domain_draws: settings.time_domain_draws.min(settings.draws),
        max_rel_closed_vs_linear,
        max_rel_time_vs_linear,
        max_linear_residual,
        passed: max_rel_closed_vs_linear <= CLOSED_VS_LINEAR_TOL
            && max_rel_time_vs_linear <= TIME_VS_LINEAR_TOL
            && max_linear_residual <= RESIDUAL_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_agrees_on_many_draws() {
        let report = run_triangle(&DrawSettings {
            draws: 300,
            seed: 11,
            time_domain_draws: 0,
            ..Default::default()
        })
        .unwrap();
        assert!(report.max_rel_closed_vs_linear <= CLOSED_VS_LINEAR_TOL, "{report:?}");
        assert!(report.max_linear_residual <= RESIDUAL_TOL, "{report:?}");
    }

    #[test]
    fn draws_are_seed_deterministic() {
        let s = DrawSettings { draws: 5, ..Default::default() };
        let a = draw_all(&s);
        let b = draw_all(&s);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.params, y.params);
            assert_eq!(x.probe, y.probe);
        }
    }
}
