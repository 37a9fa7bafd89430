//! Analytic probe-frequency response c₁₊ and the output amplitude ε_T.
//!
//! All expressions are normalized by the probe amplitude ε_p, so c₁₊ carries
//! units of 1/(rad/s) and ε_T = 2κ_x c₁₊ is dimensionless.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ProbeConfig, SystemParams};
use crate::steady::SteadyState;

/// α_z = κ_z − iσ.
#[inline]
pub fn alpha_factor(rate: f64, sigma: f64) -> Complex64 {
    Complex64::new(rate, -sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponsePoint {
    pub sigma: f64,
    pub c1_plus: Complex64,
    pub eps_t: Complex64,
    /// Absorption quadrature Re ε_T.
    pub chi_r: f64,
    /// Dispersion quadrature Im ε_T.
    pub chi_i: f64,
}

/// The rates and couplings that enter the linear response, resolved once per
/// steady state so that spectra can be evaluated without re-deriving them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseModel {
    pub kappa_x: f64,
    pub kappa_y: f64,
    pub kappa_m: f64,
    pub gamma_b: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
    /// |G_mb|².
    pub g_eff_sq: f64,
}

/// The α factors at one detuning.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Alphas {
    pub a1: Complex64,
    pub a2: Complex64,
    pub am: Complex64,
    pub ab: Complex64,
}

impl ResponseModel {
    pub fn new(params: &SystemParams, steady: &SteadyState) -> Self {
        ResponseModel {
            kappa_x: params.kappa_x,
            kappa_y: params.kappa_y,
            kappa_m: params.kappa_m,
            gamma_b: params.gamma_b,
            gamma_1: params.coupling_gamma_1,
            gamma_2: params.coupling_gamma_2,
            g_eff_sq: steady.g_eff.norm_sqr(),
        }
    }

    pub(crate) fn alphas(&self, sigma: f64) -> Alphas {
        Alphas {
            a1: alpha_factor(self.kappa_x, sigma),
            a2: alpha_factor(self.kappa_y, sigma),
            am: alpha_factor(self.kappa_m, sigma),
            ab: alpha_factor(self.gamma_b, sigma),
        }
    }

    pub(crate) fn lambda_from(&self, a: &Alphas) -> Complex64 {
        a.a2 * a.am * a.ab + self.gamma_2 * self.gamma_2 * a.ab + self.g_eff_sq * a.a2
    }

    pub(crate) fn denominator_from(&self, a: &Alphas, lambda: Complex64) -> Complex64 {
        a.a1 * lambda + self.gamma_1 * self.gamma_1 * a.a2 * a.ab
    }

    /// Λ = α₂α_mα_b + Γ₂²α_b + |G_mb|²α₂.
    pub fn lambda(&self, sigma: f64) -> Complex64 {
        self.lambda_from(&self.alphas(sigma))
    }

    /// α₁Λ + Γ₁²α₂α_b.
    pub fn denominator(&self, sigma: f64) -> Complex64 {
        let a = self.alphas(sigma);
        self.denominator_from(&a, self.lambda_from(&a))
    }

    /// Returns (Λ/D, Γ₁Γ₂α_b/D): the phase-free and phase-weighted parts of c₁₊.
    pub(crate) fn c1_parts(&self, sigma: f64) -> Result<(Complex64, Complex64)> {
        let a = self.alphas(sigma);
        let lambda = self.lambda_from(&a);
        let den = self.denominator_from(&a, lambda);
        let magnitude = den.norm();
        if !(magnitude.is_finite() && magnitude > 0.0) {
            return Err(Error::DegenerateDenominator { sigma, magnitude });
        }
        Ok((lambda / den, self.gamma_1 * self.gamma_2 * a.ab / den))
    }

    pub fn c1_plus(&self, sigma: f64, drive_ratio: Complex64) -> Result<Complex64> {
        let (plain, phased) = self.c1_parts(sigma)?;
        Ok(plain - phased * drive_ratio)
    }

    pub fn response(&self, probe: &ProbeConfig) -> Result<ResponsePoint> {
        let c1_plus = self.c1_plus(probe.sigma, probe.drive_ratio())?;
        let eps_t = 2.0 * self.kappa_x * c1_plus;
        Ok(ResponsePoint {
            sigma: probe.sigma,
            c1_plus,
            eps_t,
            chi_r: eps_t.re,
            chi_i: eps_t.im,
        })
    }
}

pub fn lambda_factor(params: &SystemParams, steady: &SteadyState, sigma: f64) -> Complex64 {
    ResponseModel::new(params, steady).lambda(sigma)
}

pub fn probe_response(params: &SystemParams, steady: &SteadyState, probe: &ProbeConfig) -> Result<ResponsePoint> {
    probe.validate()?;
    ResponseModel::new(params, steady).response(probe)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::steady::solve_steady_state;

    pub fn model_with(gamma_1: f64, gamma_2: f64, g_eff: f64) -> ResponseModel {
        let params = SystemParams::default();
        let steady = solve_steady_state(&params).unwrap();
        ResponseModel {
            gamma_1,
            gamma_2,
            g_eff_sq: g_eff * g_eff,
            ..ResponseModel::new(&params, &steady)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::model_with;
    use super::*;
    use std::f64::consts::{PI, TAU};

    const OMEGA_B: f64 = TAU * 15e6;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_factor(3.0, 0.0), Complex64::new(3.0, 0.0));
        assert_eq!(alpha_factor(3.0, -2.0), alpha_factor(3.0, 2.0).conj());
        assert_eq!(alpha_factor(0.0, 2.0), Complex64::new(0.0, -2.0));
    }

    #[test]
    fn lambda_factorizes_without_couplings() {
        let m = model_with(TAU * 3.2e6, 0.0, 0.0);
        let s = 0.37 * OMEGA_B;
        let a = m.alphas(s);
        assert_eq!(m.lambda(s), a.a2 * a.am * a.ab);
    }

    #[test]
    fn lambda_real_positive_at_zero_detuning() {
        let m = model_with(TAU * 3.2e6, TAU * 3.2e6, 0.3 * OMEGA_B);
        let l = m.lambda(0.0);
        assert_eq!(l.im, 0.0);
        assert!(l.re > 0.0);
        let expected = m.kappa_y * m.kappa_m * m.gamma_b + m.gamma_2.powi(2) * m.gamma_b + m.g_eff_sq * m.kappa_y;
        assert!((l.re - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn decoupled_cavity_is_bare_lorentzian() {
        let m = model_with(0.0, TAU * 3.2e6, 0.3 * OMEGA_B);
        for &(xi, phi) in &[(0.0, 0.0), (1.0, 1.0), (2.0, PI)] {
            for &s in &[0.0, 0.1 * OMEGA_B, -0.6 * OMEGA_B] {
                let r = m.response(&ProbeConfig::new(phi, xi, s)).unwrap();
                let expected = 2.0 * m.kappa_x / alpha_factor(m.kappa_x, s);
                assert!((r.eps_t - expected).norm() <= 1e-14 * expected.norm());
            }
        }
        let r = m.response(&ProbeConfig::new(0.0, 0.0, 0.0)).unwrap();
        assert!((r.eps_t - 2.0).norm() < 1e-14);
    }

    #[test]
    fn single_probe_is_phase_blind() {
        let m = model_with(TAU * 3.2e6, TAU * 3.2e6, 0.3 * OMEGA_B);
        let a = m.response(&ProbeConfig::new(0.0, 0.0, 0.2 * OMEGA_B)).unwrap();
        let b = m.response(&ProbeConfig::new(2.1, 0.0, 0.2 * OMEGA_B)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quadratures_and_output_relation() {
        let m = model_with(TAU * 3.2e6, TAU * 3.2e6, 0.3 * OMEGA_B);
        let r = m.response(&ProbeConfig::new(0.4, 0.7, -0.1 * OMEGA_B)).unwrap();
        assert_eq!(r.eps_t, 2.0 * m.kappa_x * r.c1_plus);
        assert_eq!(r.chi_r, r.eps_t.re);
        assert_eq!(r.chi_i, r.eps_t.im);
    }

    #[test]
    fn response_is_affine_in_drive_ratio() {
        let m = model_with(TAU * 3.2e6, TAU * 3.2e6, 0.3 * OMEGA_B);
        let s = 0.21 * OMEGA_B;
        let w = [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.2), Complex64::new(1.0, 0.4)];
        let v: Vec<Complex64> = w.iter().map(|&x| m.c1_plus(s, x).unwrap()).collect();
        // Collinear and equally spaced: the midpoint drive gives the midpoint response.
        let mid = (v[0] + v[2]) * 0.5;
        assert!((v[1] - mid).norm() <= 1e-13 * v[0].norm());
    }

    #[test]
    fn lossless_limit_zero_without_rates_is_guarded() {
        let m = ResponseModel {
            kappa_x: 0.0,
            kappa_y: 0.0,
            kappa_m: 0.0,
            gamma_b: 0.0,
            gamma_1: 0.0,
            gamma_2: 0.0,
            g_eff_sq: 0.0,
        };
        assert!(matches!(
            m.response(&ProbeConfig::new(0.0, 0.0, 0.0)),
            Err(Error::DegenerateDenominator { .. })
        ));
    }
}

#[cfg(test)]
mod proptests {
    use super::test_support::model_with;
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    const OMEGA_B: f64 = TAU * 15e6;

    proptest! {
        #[test]
        fn conjugate_mirror(s in -1.0f64..1.0, phi in -7.0f64..7.0, xi in 0.0f64..2.0) {
            let m = model_with(TAU * 3.2e6, TAU * 3.2e6, 0.32 * OMEGA_B);
            let a = m.response(&ProbeConfig::new(phi, xi, -s * OMEGA_B)).unwrap();
            let b = m.response(&ProbeConfig::new(-phi, xi, s * OMEGA_B)).unwrap();
            prop_assert_eq!(a.eps_t, b.eps_t.conj());
        }

        #[test]
        fn absorption_even_without_second_probe(s in 0.0f64..1.0) {
            let m = model_with(TAU * 3.2e6, TAU * 3.2e6, 0.32 * OMEGA_B);
            let a = m.response(&ProbeConfig::new(0.0, 0.0, s * OMEGA_B)).unwrap();
            let b = m.response(&ProbeConfig::new(0.0, 0.0, -s * OMEGA_B)).unwrap();
            prop_assert_eq!(a.chi_r, b.chi_r);
        }
    }
}
