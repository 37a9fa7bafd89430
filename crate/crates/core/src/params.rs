//! Physical constants, tunable parameters and the drive quantities derived
//! from them.
//!
//! Every frequency, rate and coupling stored here is angular (rad/s). Ordinary
//! frequencies only appear at the config boundary; see [`crate::config`].

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// How the drive detunings of the steady state are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetuningMode {
    /// Δ_x = Δ_y = Δ_m = ω_b (resolved-sideband regime).
    #[default]
    #[serde(rename = "pinned")]
    ResolvedSidebandPinned,
    /// Δ_m = Δ_m⁰ + g_mb (b_s + b_s*), solved by damped fixed-point iteration.
    #[serde(rename = "selfconsistent")]
    SelfConsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    pub omega_cavity_1: f64,
    pub omega_cavity_2: f64,
    pub omega_b: f64,
    pub kappa_x: f64,
    pub kappa_y: f64,
    pub kappa_m: f64,
    pub gamma_b: f64,
    /// Magnon–photon coupling with cavity 1 (Γ_1).
    pub coupling_gamma_1: f64,
    /// Magnon–photon coupling with cavity 2 (Γ_2).
    pub coupling_gamma_2: f64,
    /// Bare single-magnon magnomechanical coupling.
    pub g_mb: f64,
    /// γ_g in rad/s per tesla.
    pub gyromagnetic_ratio: f64,
    /// H_d in tesla.
    pub drive_field: f64,
    /// Bias field H in tesla; only used to report ω_m = γ_g H.
    pub bias_field: Option<f64>,
    /// ρ in m⁻³.
    pub spin_density: f64,
    /// D in m.
    pub sphere_diameter: f64,
    pub drive_detuning_mode: DetuningMode,
    /// Bare magnon detuning Δ_m⁰, the starting point of the self-consistent shift.
    pub bare_magnon_detuning: f64,
    /// Pins G_mb directly and bypasses the steady-state derivation of it.
    pub g_mb_effective_override: Option<Complex64>,
    /// Parsed for completeness; no implemented equation consumes it.
    pub temperature: Option<f64>,
}

impl Default for SystemParams {
    fn default() -> Self {
        let omega_b = TAU * 15e6;
        SystemParams {
            omega_cavity_1: TAU * 10e9,
            omega_cavity_2: TAU * 10e9,
            omega_b,
            kappa_x: TAU * 2.1e6,
            kappa_y: TAU * 0.15e6,
            kappa_m: TAU * 0.1e6,
            gamma_b: 1e-5 * omega_b,
            coupling_gamma_1: TAU * 3.2e6,
            coupling_gamma_2: TAU * 3.2e6,
            g_mb: TAU * 0.3,
            gyromagnetic_ratio: TAU * 28e9,
            drive_field: 1.3e-4,
            bias_field: None,
            spin_density: 4.22e27,
            sphere_diameter: 250e-6,
            drive_detuning_mode: DetuningMode::ResolvedSidebandPinned,
            bare_magnon_detuning: omega_b,
            g_mb_effective_override: None,
            temperature: Some(10e-3),
        }
    }
}

impl SystemParams {
    /// Checks every invariant, naming the offending config key on failure.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("modes.omega_b", self.omega_b),
            ("damping.kappa_x", self.kappa_x),
            ("damping.kappa_y", self.kappa_y),
            ("damping.kappa_m", self.kappa_m),
            ("damping.gamma_b", self.gamma_b),
            ("material.spin_density", self.spin_density),
            ("material.sphere_diameter", self.sphere_diameter),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(key, format!("must be finite and > 0, got {value}")));
            }
        }
        let non_negative = [
            ("modes.omega_cavity_1", self.omega_cavity_1),
            ("modes.omega_cavity_2", self.omega_cavity_2),
            ("couplings.gamma_1", self.coupling_gamma_1),
            ("couplings.gamma_2", self.coupling_gamma_2),
            ("couplings.g_mb", self.g_mb),
            ("drive.gyromagnetic_ratio", self.gyromagnetic_ratio),
            ("drive.drive_field", self.drive_field),
        ];
        for (key, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::invalid(key, format!("must be finite and >= 0, got {value}")));
            }
        }
        if !self.bare_magnon_detuning.is_finite() {
            return Err(Error::invalid("drive.bare_magnon_detuning", "must be finite"));
        }
        if let Some(g) = self.g_mb_effective_override {
            if !(g.re.is_finite() && g.im.is_finite()) {
                return Err(Error::invalid("couplings.g_mb_effective", "must be finite"));
            }
        }
        if let Some(h) = self.bias_field {
            if !h.is_finite() {
                return Err(Error::invalid("modes.bias_field", "must be finite"));
            }
        }
        if self.drive_detuning_mode == DetuningMode::ResolvedSidebandPinned {
            let widest = self.kappa_m.max(self.kappa_x).max(self.kappa_y);
            if self.omega_b <= widest {
                return Err(Error::invalid(
                    "modes.omega_b",
                    format!(
                        "pinned detunings need the resolved-sideband regime: omega_b ({:.4e}) must exceed every cavity/magnon linewidth ({widest:.4e})",
                        self.omega_b
                    ),
                ));
            }
        }
        Ok(())
    }

    /// ω_m = γ_g H when a bias field is configured.
    pub fn magnon_frequency(&self) -> Option<f64> {
        self.bias_field.map(|h| self.gyromagnetic_ratio * h)
    }

    /// Expresses an angular frequency in units of ω_b.
    pub fn in_omega_b(&self, value: f64) -> f64 {
        value / self.omega_b
    }
}

/// Probe settings: relative phase φ, amplitude ratio ξ and effective detuning σ = δ − ω_b.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub phi: f64,
    pub xi: f64,
    pub sigma: f64,
}

impl ProbeConfig {
    pub fn new(phi: f64, xi: f64, sigma: f64) -> Self {
        ProbeConfig { phi, xi, sigma }
    }

    pub fn with_sigma(self, sigma: f64) -> Self {
        ProbeConfig { sigma, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi.is_finite() && self.xi >= 0.0) {
            return Err(Error::invalid("probe.xi", format!("must be finite and >= 0, got {}", self.xi)));
        }
        if !self.phi.is_finite() {
            return Err(Error::invalid("probe.phi", "must be finite"));
        }
        if !self.sigma.is_finite() {
            return Err(Error::invalid("probe.sigma", "must be finite"));
        }
        Ok(())
    }

    /// ξ e^{iφ}, the complex weight of the cavity-2 probe. An absent probe
    /// is an unsigned zero so that outputs do not depend on φ at all.
    pub fn drive_ratio(&self) -> Complex64 {
        if self.xi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.xi, self.phi)
    }
}

/// Total spin number N = ρ V of the sphere, V = (π/6) D³.
pub fn spin_count(params: &SystemParams) -> Result<f64> {
    if !(params.sphere_diameter > 0.0) {
        return Err(Error::invalid("material.sphere_diameter", "must be > 0"));
    }
    if !(params.spin_density > 0.0) {
        return Err(Error::invalid("material.spin_density", "must be > 0"));
    }
    Ok(params.spin_density * PI / 6.0 * params.sphere_diameter.powi(3))
}

/// Total spin S = (5/2) N.
pub fn total_spin(params: &SystemParams) -> Result<f64> {
    Ok(2.5 * spin_count(params)?)
}

/// Rabi frequency ε_m = (√(5N)/4) γ_g H_d of the magnon drive.
pub fn rabi_frequency(params: &SystemParams) -> Result<f64> {
    let n = spin_count(params)?;
    Ok((5.0 * n).sqrt() / 4.0 * params.gyromagnetic_ratio * params.drive_field)
}

/// Probe amplitude ε = √(2κ℘ / ħω) in √(photons/s).
pub fn probe_amplitude(power: f64, kappa: f64, omega: f64) -> Result<f64> {
    if !(power >= 0.0) {
        return Err(Error::invalid("probe.power", format!("must be >= 0, got {power}")));
    }
    if !(omega > 0.0) {
        return Err(Error::invalid("probe.omega", "carrier frequency must be > 0"));
    }
    Ok((2.0 * kappa * power / (HBAR * omega)).sqrt())
}

/// Amplitude ratio of the cavity-2 probe relative to the cavity-1 probe,
/// i.e. the ξ that weights the phase-bearing term.
pub fn amplitude_ratio(params: &SystemParams, power_x: f64, power_y: f64) -> Result<f64> {
    let eps_x = probe_amplitude(power_x, params.kappa_x, params.omega_cavity_1)?;
    let eps_y = probe_amplitude(power_y, params.kappa_y, params.omega_cavity_2)?;
    if eps_x == 0.0 {
        return Err(Error::invalid("probe.power_x", "cavity-1 probe power must be > 0 to form a ratio"));
    }
    Ok(eps_y / eps_x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_second_probe_has_no_phase() {
        for phi in [0.0, 1.0, std::f64::consts::PI, -2.5] {
            let w = ProbeConfig { phi, xi: 0.0, sigma: 0.0 }.drive_ratio();
            assert!(w.re.is_sign_positive() && w.im.is_sign_positive() && w.norm() == 0.0);
        }
    }

    #[test]
    fn spin_count_matches_direct_arithmetic() {
        let p = SystemParams::default();
        // 4.22e27 * pi/6 * (2.5e-4)^3
        let expected = 4.22e27 * 0.523_598_775_598_298_8 * 1.5625e-11;
        let n = spin_count(&p).unwrap();
        assert!((n - expected).abs() / expected < 1e-14);
        assert!((n - 3.4525e16).abs() / 3.4525e16 < 1e-3);
        assert!((total_spin(&p).unwrap() - 2.5 * n).abs() < 1.0);
    }

    #[test]
    fn degenerate_sphere_is_rejected() {
        let p = SystemParams { sphere_diameter: 0.0, ..Default::default() };
        assert!(matches!(spin_count(&p), Err(Error::InvalidParameter { key, .. }) if key == "material.sphere_diameter"));
        assert!(p.validate().is_err());
    }

    #[test]
    fn doubling_diameter_gives_eight_times_spins() {
        let p = SystemParams::default();
        let q = SystemParams { sphere_diameter: 2.0 * p.sphere_diameter, ..p.clone() };
        assert_eq!(spin_count(&q).unwrap(), 8.0 * spin_count(&p).unwrap());
    }

    #[test]
    fn rabi_frequency_golden_value() {
        // sqrt(5 N)/4 * 2π·28e9 * 1.3e-4 with N from the default sphere.
        let n: f64 = 4.22e27 * std::f64::consts::PI / 6.0 * 250e-6f64.powi(3);
        let expected = (5.0 * n).sqrt() / 4.0 * TAU * 28e9 * 1.3e-4;
        let got = rabi_frequency(&SystemParams::default()).unwrap();
        assert!((got - expected).abs() / expected < 1e-14);
        assert!((got - 2.375_59e15).abs() / 2.375_59e15 < 1e-5);
    }

    #[test]
    fn no_drive_no_rabi() {
        let p = SystemParams { drive_field: 0.0, ..Default::default() };
        assert_eq!(rabi_frequency(&p).unwrap(), 0.0);
    }

    #[test]
    fn quadrupled_spins_double_rabi() {
        let p = SystemParams::default();
        let q = SystemParams { spin_density: 4.0 * p.spin_density, ..p.clone() };
        let ratio = rabi_frequency(&q).unwrap() / rabi_frequency(&p).unwrap();
        assert!((ratio - 2.0).abs() < 1e-14);
    }

    #[test]
    fn probe_amplitudes() {
        assert_eq!(probe_amplitude(0.0, 1e6, 1e10).unwrap(), 0.0);
        assert!(probe_amplitude(-1.0, 1e6, 1e10).is_err());
        let a = probe_amplitude(1e-9, 1e6, 1e10).unwrap();
        let b = probe_amplitude(4e-9, 1e6, 1e10).unwrap();
        assert!((b / a - 2.0).abs() < 1e-14);

        let equal = SystemParams { kappa_y: TAU * 2.1e6, ..Default::default() };
        assert!((amplitude_ratio(&equal, 1e-9, 1e-9).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn defaults_validate_and_sign_errors_name_key() {
        SystemParams::default().validate().unwrap();
        let p = SystemParams { kappa_x: -1.0, ..Default::default() };
        match p.validate() {
            Err(Error::InvalidParameter { key, .. }) => assert_eq!(key, "damping.kappa_x"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unresolved_sideband_rejected_only_when_pinned() {
        let mut p = SystemParams { kappa_x: TAU * 20e6, ..Default::default() };
        assert!(p.validate().is_err());
        p.drive_detuning_mode = DetuningMode::SelfConsistent;
        p.validate().unwrap();
    }

    #[test]
    fn negative_xi_rejected() {
        assert!(ProbeConfig::new(0.0, -0.1, 0.0).validate().is_err());
        assert!(ProbeConfig::new(0.0, 1.0, f64::NAN).validate().is_err());
        ProbeConfig::new(7.0, 0.0, -3.0).validate().unwrap();
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rabi_invariant_under_spin_drive_trade(n_scale in 0.1f64..10.0, hd in 1e-6f64..1e-2) {
            let p = SystemParams { drive_field: hd, spin_density: 4.22e27 * n_scale, ..Default::default() };
            let q = SystemParams { drive_field: hd / 2.0, spin_density: 4.0 * p.spin_density, ..p.clone() };
            let a = rabi_frequency(&p).unwrap();
            let b = rabi_frequency(&q).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a);
        }

        #[test]
        fn spin_count_strictly_monotone(d in 1e-6f64..1e-3, rho in 1e25f64..1e28, f in 1.001f64..3.0) {
            let p = SystemParams { sphere_diameter: d, spin_density: rho, ..Default::default() };
            let n = spin_count(&p).unwrap();
            let bigger_d = SystemParams { sphere_diameter: d * f, ..p.clone() };
            let denser = SystemParams { spin_density: rho * f, ..p.clone() };
            prop_assert!(spin_count(&bigger_d).unwrap() > n);
            prop_assert!(spin_count(&denser).unwrap() > n);
        }
    }
}
