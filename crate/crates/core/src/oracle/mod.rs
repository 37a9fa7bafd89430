//! Independent checks of the closed forms.
//!
//! The sideband solve builds the linearized equations of motion as a generic
//! 4×4 system and never touches the Λ-factor algebra of [`crate::response`].
//! The time-domain integrators propagate the equations of motion directly and
//! demodulate the result.

mod linalg;
mod time_domain;
mod triangle;

pub use linalg::{norm, residual, solve};
pub use time_domain::{
    integrate_full_nonlinear, integrate_time_domain, recommended_nonlinear, rk4_step, LinearDynamics, NonlinearEstimate, TimeDomainResult,
    TimeDomainSettings,
};
pub use triangle::{run_triangle, DrawSettings, TriangleReport};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::params::{ProbeConfig, SystemParams};
use crate::steady::SteadyState;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Unknown ordering used throughout the oracle: (c₁₊, c₂₊, m₊, b₊).
pub type Modes = [Complex64; 4];

/// Coupling matrix K of the slow-frame dynamics ż = −K z + d e^{−iσt}.
pub(crate) fn coupling_matrix(params: &SystemParams, g_eff: Complex64) -> [[Complex64; 4]; 4] {
    let g1 = I * params.coupling_gamma_1;
    let g2 = I * params.coupling_gamma_2;
    let c = |x: f64| Complex64::new(x, 0.0);
    [
        [c(params.kappa_x), ZERO, g1, ZERO],
        [ZERO, c(params.kappa_y), g2, ZERO],
        [g1, g2, c(params.kappa_m), I * g_eff],
        [ZERO, ZERO, I * g_eff.conj(), c(params.gamma_b)],
    ]
}

/// The sideband equations A x = d at one probe detuning, in units of ε_p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandSystem {
    pub matrix: [[Complex64; 4]; 4],
    pub drive: Modes,
}

impl SidebandSystem {
    pub fn new(params: &SystemParams, steady: &SteadyState, probe: &ProbeConfig) -> Self {
        let mut matrix = coupling_matrix(params, steady.g_eff);
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] -= I * probe.sigma;
        }
        SidebandSystem {
            matrix,
            drive: [Complex64::new(1.0, 0.0), probe.drive_ratio(), ZERO, ZERO],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandSolution {
    pub c1_plus: Complex64,
    pub c2_plus: Complex64,
    pub m_plus: Complex64,
    pub b_plus: Complex64,
    /// ‖A x − d‖ / ‖d‖.
    pub relative_residual: f64,
}

pub fn solve_sidebands(params: &SystemParams, steady: &SteadyState, probe: &ProbeConfig) -> Result<SidebandSolution> {
    let system = SidebandSystem::new(params, steady, probe);
    let x = solve(&system.matrix, &system.drive)?;
    let relative_residual = norm(&residual(&system.matrix, &x, &system.drive)) / norm(&system.drive);
    Ok(SidebandSolution {
        c1_plus: x[0],
        c2_plus: x[1],
        m_plus: x[2],
        b_plus: x[3],
        relative_residual,
    })
}
