//! Transmission T_p = T_m + T_ph and the group delay τ_g = dΨ/dσ of the
//! transmitted probe, Ψ = arg T_p.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{ProbeConfig, SystemParams};
use crate::response::ResponseModel;
use crate::steady::SteadyState;

/// |T_p| at or below which the transmission phase is treated as undefined.
pub const SINGULAR_THRESHOLD: f64 = 1e-6;
/// Finite-difference step for the phase derivative, in units of ω_b.
pub const FD_STEP: f64 = 1e-6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayMethod {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportPoint {
    pub sigma: f64,
    pub t_p: Complex64,
    pub t_m: Complex64,
    pub t_ph: Complex64,
    pub intensity: f64,
    /// Group delay in seconds; `None` until requested or when singular.
    pub tau_g: Option<f64>,
    pub tau_method: Option<DelayMethod>,
    pub singular: bool,
}

impl ResponseModel {
    /// (T_m, T_ph) at one detuning.
    pub fn transmission_parts(&self, sigma: f64, drive_ratio: Complex64) -> Result<(Complex64, Complex64)> {
        let (plain, phased) = self.c1_parts(sigma)?;
        let t_m = 1.0 - self.kappa_x * plain;
        let t_ph = -self.kappa_x * phased * drive_ratio;
        Ok((t_m, t_ph))
    }

    pub fn transmission(&self, probe: &ProbeConfig) -> Result<TransportPoint> {
        let (t_m, t_ph) = self.transmission_parts(probe.sigma, probe.drive_ratio())?;
        let t_p = t_m + t_ph;
        Ok(TransportPoint {
            sigma: probe.sigma,
            t_p,
            t_m,
            t_ph,
            intensity: t_p.norm_sqr(),
            tau_g: None,
            tau_method: None,
            singular: t_p.norm() <= SINGULAR_THRESHOLD,
        })
    }

    /// T_p and dT_p/dσ by differentiating the rational function in closed form.
    pub fn transmission_with_derivative(&self, sigma: f64, drive_ratio: Complex64) -> Result<(Complex64, Complex64)> {
        let (plain, phased) = self.c1_parts(sigma)?;
        let a = self.alphas(sigma);
        let g1_sq = self.gamma_1 * self.gamma_1;
        let lambda = self.lambda_from(&a);
        let den = self.denominator_from(&a, lambda);

        // Every α has derivative −i.
        let d_lambda = -I * (a.a2 * a.am + a.a2 * a.ab + a.am * a.ab)
            - I * self.gamma_2 * self.gamma_2
            - I * self.g_eff_sq;
        let d_den = -I * lambda + a.a1 * d_lambda - I * g1_sq * (a.a2 + a.ab);
        // T_p = 1 − κ_x(Λ + Γ₁Γ₂α_b w)/D. The phase term enters with the
        // opposite sign to c₁₊, so T_p is not 1 − κ_x c₁₊ once ξ ≠ 0.
        let coupling = self.gamma_1 * self.gamma_2 * drive_ratio;
        let numer = lambda + coupling * a.ab;
        let d_numer = d_lambda - I * coupling;

        let t_p = 1.0 - self.kappa_x * (plain + phased * drive_ratio);
        let d_t_p = -self.kappa_x * (d_numer * den - numer * d_den) / (den * den);
        Ok((t_p, d_t_p))
    }

    pub fn group_delay(&self, probe: &ProbeConfig, method: DelayMethod, omega_b: f64) -> Result<TransportPoint> {
        let mut point = self.transmission(probe)?;
        point.tau_method = Some(method);
        if point.singular {
            return Ok(point);
        }
        let w = probe.drive_ratio();
        let tau = match method {
            DelayMethod::Analytic => {
                let (t_p, d_t_p) = self.transmission_with_derivative(probe.sigma, w)?;
                (d_t_p / t_p).im
            }
            DelayMethod::FiniteDifference => {
                let h = FD_STEP * omega_b;
                let (m_plus, ph_plus) = self.transmission_parts(probe.sigma + h, w)?;
                let (m_minus, ph_minus) = self.transmission_parts(probe.sigma - h, w)?;
                let step = wrap_phase((m_plus + ph_plus).arg() - (m_minus + ph_minus).arg());
                step / (2.0 * h)
            }
        };
        point.tau_g = Some(tau);
        Ok(point)
    }
}

/// Maps a phase difference onto the nearest branch, (−π, π].
pub fn wrap_phase(delta: f64) -> f64 {
    let mut d = delta;
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Unwraps a phase sequence in place, removing jumps larger than π.
pub fn unwrap_phases(phases: &mut [f64]) {
    for i in 1..phases.len() {
        let prev = phases[i - 1];
        phases[i] = prev + wrap_phase(phases[i] - prev);
    }
}

pub fn transmission(params: &SystemParams, steady: &SteadyState, probe: &ProbeConfig) -> Result<TransportPoint> {
    probe.validate()?;
    ResponseModel::new(params, steady).transmission(probe)
}

pub fn group_delay(
    params: &SystemParams,
    steady: &SteadyState,
    probe: &ProbeConfig,
    method: DelayMethod,
) -> Result<TransportPoint> {
    probe.validate()?;
    ResponseModel::new(params, steady).group_delay(probe, method, params.omega_b)
}
