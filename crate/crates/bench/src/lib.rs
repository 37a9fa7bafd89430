//! Shared fixtures for the benchmarks.

use crossmag::{solve_steady_state, Complex64, ProbeConfig, SteadyState, SystemParams};

/// Default parameters with the effective coupling pinned at 0.32 ω_b.
pub fn pinned_params() -> SystemParams {
    let p = SystemParams::default();
    SystemParams {
        g_mb_effective_override: Some(Complex64::new(0.32 * p.omega_b, 0.0)),
        ..p
    }
}

/// Pinned parameters with the phonon linewidth raised to 1e-2 ω_b so that a
/// time-domain run settles in a few thousand mechanical periods.
pub fn broad_phonon_params() -> SystemParams {
    let p = pinned_params();
    SystemParams {
        gamma_b: 1e-2 * p.omega_b,
        ..p
    }
}

pub fn steady(params: &SystemParams) -> SteadyState {
    solve_steady_state(params).expect("steady state of a fixture")
}

/// Both probes on, in phase, at σ = 0.2 ω_b.
pub fn probe(params: &SystemParams) -> ProbeConfig {
    ProbeConfig {
        phi: 0.0,
        xi: 0.5,
        sigma: 0.2 * params.omega_b,
    }
}
