//! Fixed-step classical RK4 integration of the mode equations, followed by
//! demodulation of the settled signal.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{coupling_matrix, Modes, I, ZERO};
use crate::error::{Error, Result};
use crate::params::{rabi_frequency, ProbeConfig, SystemParams};
use crate::steady::{detuning_shift, SteadyState};

/// Fraction of the run discarded as transient.
pub const TRANSIENT_FRACTION: f64 = 0.8;
/// Largest allowed step in units of 1/(fastest frequency).
pub const MAX_STEP_FACTOR: f64 = 1e-2;
/// Shortest allowed duration in units of 1/(slowest decay rate).
pub const MIN_DURATION_FACTOR: f64 = 10.0;
/// Relative change of the demodulated amplitude between the two halves of
/// the final window above which the transient counts as undecayed.
pub const DRIFT_LIMIT: f64 = 1e-6;

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<F>(f: &F, t: f64, y: &Modes, h: f64) -> Modes
where
    F: Fn(f64, &Modes) -> Modes,
{
    let shifted = |base: &Modes, k: &Modes, scale: f64| -> Modes {
        let mut out = *base;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += ki * scale;
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &shifted(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &shifted(y, &k2, 0.5 * h));
    let k4 = f(t + h, &shifted(y, &k3, h));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainSettings {
    pub duration: f64,
    pub step: f64,
}

impl TimeDomainSettings {
    /// Step at the bound, duration long enough that the slowest decay has
    /// shrunk the transient by ~e⁻²⁰ before the demodulation window opens.
    pub fn recommended(fastest: f64, slowest: f64) -> Self {
        TimeDomainSettings {
            duration: 26.0 / slowest,
            step: MAX_STEP_FACTOR / fastest,
        }
    }

    fn validate(&self, fastest: f64, slowest: f64) -> Result<usize> {
        if !(self.step > 0.0 && self.duration > 0.0) {
            return Err(Error::Integration("step and duration must be > 0".into()));
        }
        if self.step > MAX_STEP_FACTOR / fastest * (1.0 + 1e-12) {
            return Err(Error::Integration(format!(
                "step {:.3e} s exceeds {MAX_STEP_FACTOR:e}/{fastest:.3e}",
                self.step
            )));
        }
        if self.duration < MIN_DURATION_FACTOR / slowest * (1.0 - 1e-12) {
            return Err(Error::Integration(format!(
                "duration {:.3e} s is shorter than {MIN_DURATION_FACTOR}/{slowest:.3e}",
                self.duration
            )));
        }
        Ok((self.duration / self.step).round() as usize)
    }
}

/// Linearized slow-frame dynamics ż = −K z + d e^{−iσt}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDynamics {
    pub coupling: [[Complex64; 4]; 4],
    pub drive: Modes,
    pub sigma: f64,
}

impl LinearDynamics {
    pub fn new(params: &SystemParams, steady: &SteadyState, probe: &ProbeConfig) -> Self {
        LinearDynamics {
            coupling: coupling_matrix(params, steady.g_eff),
            drive: [Complex64::new(1.0, 0.0), probe.drive_ratio(), ZERO, ZERO],
            sigma: probe.sigma,
        }
    }

    fn rates(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.coupling[i][i].re)
    }

    /// Upper bound on the frequencies present in the solution.
    pub fn fastest_frequency(&self) -> f64 {
        let rates = self.rates();
        let mut off_diag = 0.0;
        for i in 0..4 {
            for j in 0..i {
                off_diag += self.coupling[i][j].norm_sqr();
            }
        }
        rates.iter().copied().fold(self.sigma.abs(), f64::max).max(off_diag.sqrt())
    }

    pub fn slowest_decay(&self) -> f64 {
        self.rates().iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn derivative(&self, z: &Modes, phasor: Complex64) -> Modes {
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.drive[i] * phasor;
            for (kij, zj) in self.coupling[i].iter().zip(z) {
                acc -= kij * zj;
            }
            *o = acc;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainResult {
    /// Demodulated amplitudes (c₁₊, c₂₊, m₊, b₊).
    pub amplitudes: Modes,
    pub c1_plus: Complex64,
    /// Relative change of the demodulated c₁₊ across the final window.
    pub drift: f64,
    pub steps: usize,
}

/// Integrates the linearized equations driven at e^{−iσt} and extracts the
/// probe-frequency amplitudes.
pub fn integrate_time_domain(
    params: &SystemParams,
    steady: &SteadyState,
    probe: &ProbeConfig,
    settings: TimeDomainSettings,
) -> Result<TimeDomainResult> {
    integrate_linear(&LinearDynamics::new(params, steady, probe), settings)
}

pub fn integrate_linear(dynamics: &LinearDynamics, settings: TimeDomainSettings) -> Result<TimeDomainResult> {
    let steps = settings.validate(dynamics.fastest_frequency(), dynamics.slowest_decay())?;
    let h = settings.step;
    let sigma = dynamics.sigma;

    // RK4 on a linear system with exponential forcing is itself linear:
    // z_{n+1} = P z_n + e^{−iσ t_n} q. Build P and q by stepping basis states.
    let forced = |t: f64, z: &Modes| dynamics.derivative(z, Complex64::from_polar(1.0, -sigma * t));
    let free = |_: f64, z: &Modes| dynamics.derivative(z, ZERO);
    let q = rk4_step(&forced, 0.0, &[ZERO; 4], h);
    let mut propagator = [[ZERO; 4]; 4];
    for j in 0..4 {
        let mut e = [ZERO; 4];
        e[j] = Complex64::new(1.0, 0.0);
        let col = rk4_step(&free, 0.0, &e, h);
        for i in 0..4 {
            propagator[i][j] = col[i];
        }
    }

    // In the probe frame y_n = e^{+iσ t_n} z_n the step is autonomous:
    // y_{n+1} = e^{iσh} (P y_n + q). The demodulated sum is then a plain sum of y.
    let rotation = Complex64::from_polar(1.0, sigma * h);
    let mut step = [[ZERO; 4]; 4];
    let mut offset = [ZERO; 4];
    for i in 0..4 {
        offset[i] = rotation * q[i];
        for j in 0..4 {
            step[i][j] = rotation * propagator[i][j];
        }
    }

    let window = DemodWindow::new(steps, h, sigma);
    let one = Complex64::new(1.0, 0.0);
    let mut y = [ZERO; 4];
    let mut acc = WindowAccumulator::new(&window);

    for n in 0..steps {
        let mut next = offset;
        for (v, row) in next.iter_mut().zip(&step) {
            for (a, yj) in row.iter().zip(&y) {
                *v += a * yj;
            }
        }
        y = next;
        acc.push(n + 1, &y, one);
    }

    let (amplitudes, drift) = acc.finish();
    if drift > DRIFT_LIMIT {
        return Err(Error::TransientNotDecayed { drift, limit: DRIFT_LIMIT });
    }
    Ok(TimeDomainResult {
        amplitudes,
        c1_plus: amplitudes[0],
        drift,
        steps,
    })
}

/// Sample range of the demodulation window: the tail after the transient,
/// trimmed to a whole number of probe periods when σ ≠ 0.
struct DemodWindow {
    start: usize,
    end: usize,
}

impl DemodWindow {
    fn new(steps: usize, h: f64, sigma: f64) -> Self {
        let first = ((steps as f64) * TRANSIENT_FRACTION).ceil() as usize;
        let available = steps - first;
        let len = if sigma != 0.0 {
            let period = TAU / sigma.abs() / h;
            let periods = (available as f64 / period).floor();
            if periods >= 1.0 {
                ((periods * period).round() as usize).clamp(2, available)
            } else {
                available
            }
        } else {
            available
        };
        DemodWindow {
            start: steps - len + 1,
            end: steps,
        }
    }
}

struct WindowAccumulator {
    start: usize,
    mid: usize,
    end: usize,
    halves: [Modes; 2],
    counts: [usize; 2],
}

impl WindowAccumulator {
    fn new(w: &DemodWindow) -> Self {
        WindowAccumulator {
            start: w.start,
            mid: w.start + (w.end + 1 - w.start) / 2,
            end: w.end,
            halves: [[ZERO; 4]; 2],
            counts: [0; 2],
        }
    }

    fn push(&mut self, n: usize, z: &Modes, weight: Complex64) {
        if n < self.start || n > self.end {
            return;
        }
        let half = usize::from(n >= self.mid);
        for (a, zi) in self.halves[half].iter_mut().zip(z) {
            *a += zi * weight;
        }
        self.counts[half] += 1;
    }

    fn finish(self) -> (Modes, f64) {
        let total = (self.counts[0] + self.counts[1]) as f64;
        let mut mean = [ZERO; 4];
        for i in 0..4 {
            mean[i] = (self.halves[0][i] + self.halves[1][i]) / total;
        }
        let first = self.halves[0][0] / self.counts[0].max(1) as f64;
        let second = self.halves[1][0] / self.counts[1].max(1) as f64;
        let diff = (first - second).norm();
        let drift = if diff == 0.0 { 0.0 } else { diff / mean[0].norm().max(f64::MIN_POSITIVE) };
        (mean, drift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearEstimate {
    /// Long-time averages in the drive frame, packaged as a steady state.
    pub state: SteadyState,
    /// Largest relative change of the averaged amplitudes across the final window.
    pub drift: f64,
    pub steps: usize,
}

/// Integrates the full nonlinear mode equations with the probes off, starting
/// from empty modes, and averages the settled amplitudes.
///
/// The magnon equation uses the bare detuning `params.bare_magnon_detuning`
/// plus the dynamical shift g_mb (b + b*); the cavities sit at ω_b.
pub fn integrate_full_nonlinear(params: &SystemParams, settings: TimeDomainSettings) -> Result<NonlinearEstimate> {
    let eps = Complex64::new(rabi_frequency(params)?, 0.0);
    let (fastest, slowest) = nonlinear_scales(params);
    let steps = settings.validate(fastest, slowest)?;
    let h = settings.step;

    let delta_c = params.omega_b;
    let zeta_x = Complex64::new(params.kappa_x, delta_c);
    let zeta_y = Complex64::new(params.kappa_y, delta_c);
    let zeta_m = Complex64::new(params.kappa_m, params.bare_magnon_detuning);
    let zeta_b = Complex64::new(params.gamma_b, params.omega_b);
    let (g1, g2, g) = (params.coupling_gamma_1, params.coupling_gamma_2, params.g_mb);

    let rhs = |_: f64, y: &Modes| -> Modes {
        let [c1, c2, m, b] = *y;
        [
            -zeta_x * c1 - I * g1 * m,
            -zeta_y * c2 - I * g2 * m,
            -zeta_m * m - I * (g1 * c1 + g2 * c2) - I * g * m * (2.0 * b.re) + eps,
            -zeta_b * b - I * g * m.norm_sqr(),
        ]
    };

    let window = DemodWindow::new(steps, h, 0.0);
    let mut acc = WindowAccumulator::new(&window);
    let one = Complex64::new(1.0, 0.0);
    let mut y = [ZERO; 4];
    for n in 0..steps {
        y = rk4_step(&rhs, n as f64 * h, &y, h);
        if y.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Integration(format!("state diverged after {n} steps")));
        }
        acc.push(n + 1, &y, one);
    }
    let halves = (acc.halves, acc.counts);
    let (mean, _) = acc.finish();
    let drift = (0..4)
        .map(|i| {
            let first = halves.0[0][i] / halves.1[0].max(1) as f64;
            let second = halves.0[1][i] / halves.1[1].max(1) as f64;
            let d = (first - second).norm();
            if d == 0.0 {
                0.0
            } else {
                d / mean[i].norm().max(f64::MIN_POSITIVE)
            }
        })
        .fold(0.0, f64::max);
    if drift > DRIFT_LIMIT {
        return Err(Error::TransientNotDecayed { drift, limit: DRIFT_LIMIT });
    }

    let [c1, c2, m, b] = mean;
    let state = SteadyState {
        m_s: m,
        b_s: b,
        c1_s: c1,
        c2_s: c2,
        delta_m: params.bare_magnon_detuning + detuning_shift(params, b),
        delta_cavity: delta_c,
        g_eff: g * m,
        g_eff_pinned: false,
        iterations: 0,
        converged: true,
    };
    Ok(NonlinearEstimate { state, drift, steps })
}

/// (fastest frequency, slowest decay rate) of the undriven mode equations.
pub fn nonlinear_scales(params: &SystemParams) -> (f64, f64) {
    let fastest = [
        params.omega_b,
        params.bare_magnon_detuning.abs(),
        params.kappa_x,
        params.kappa_y,
        params.kappa_m,
        params.gamma_b,
        params.coupling_gamma_1.hypot(params.coupling_gamma_2),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let slowest = [params.kappa_x, params.kappa_y, params.kappa_m, params.gamma_b]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    (fastest, slowest)
}

/// Settings for the nonlinear oracle at its step and duration bounds.
pub fn recommended_nonlinear(params: &SystemParams) -> TimeDomainSettings {
    let (fastest, slowest) = nonlinear_scales(params);
    TimeDomainSettings::recommended(fastest, slowest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::solve_sidebands;
    use crate::params::DetuningMode;
    use crate::steady::solve_steady_state;

    fn inflated() -> SystemParams {
        let p = SystemParams::default();
        SystemParams { gamma_b: 1e-2 * p.omega_b, ..p }
    }

    #[test]
    fn rk4_integrates_exponential_decay() {
        let f = |_: f64, y: &Modes| y.map(|v| -v);
        let mut y = [Complex64::new(1.0, 0.0); 4];
        let h = 1e-2;
        for n in 0..100 {
            y = rk4_step(&f, n as f64 * h, &y, h);
        }
        assert!((y[0].re - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn undriven_linear_system_stays_at_rest() {
        let p = inflated();
        let s = solve_steady_state(&p).unwrap();
        let mut d = LinearDynamics::new(&p, &s, &ProbeConfig::new(0.0, 0.0, 0.2 * p.omega_b));
        d.drive = [ZERO; 4];
        let settings = TimeDomainSettings::recommended(d.fastest_frequency(), d.slowest_decay());
        let r = integrate_linear(&d, settings).unwrap();
        assert_eq!(r.c1_plus, ZERO);
    }

    #[test]
    fn single_mode_relaxes_to_inverse_rate() {
        let p = SystemParams {
            coupling_gamma_1: 0.0,
            coupling_gamma_2: 0.0,
            g_mb_effective_override: Some(ZERO),
            ..inflated()
        };
        let s = solve_steady_state(&p).unwrap();
        let d = LinearDynamics::new(&p, &s, &ProbeConfig::new(0.0, 0.0, 0.0));
        let settings = TimeDomainSettings::recommended(d.fastest_frequency(), d.slowest_decay());
        let r = integrate_linear(&d, settings).unwrap();
        assert!((r.c1_plus - 1.0 / p.kappa_x).norm() * p.kappa_x < 1e-9);
    }

    #[test]
    fn linear_time_domain_matches_sideband_solve() {
        let p = SystemParams {
            g_mb_effective_override: Some(Complex64::new(0.32 * TAU * 15e6, 0.0)),
            ..inflated()
        };
        let s = solve_steady_state(&p).unwrap();
        let probe = ProbeConfig::new(0.9, 1.0, 0.41 * p.omega_b);
        let d = LinearDynamics::new(&p, &s, &probe);
        let settings = TimeDomainSettings::recommended(d.fastest_frequency(), d.slowest_decay());
        let r = integrate_time_domain(&p, &s, &probe, settings).unwrap();
        let x = solve_sidebands(&p, &s, &probe).unwrap();
        assert!((r.c1_plus - x.c1_plus).norm() <= 1e-6 * x.c1_plus.norm());
        assert!((r.amplitudes[3] - x.b_plus).norm() <= 1e-6 * x.b_plus.norm());

        let half = TimeDomainSettings { step: settings.step / 2.0, ..settings };
        let r2 = integrate_time_domain(&p, &s, &probe, half).unwrap();
        assert!((r.c1_plus - r2.c1_plus).norm() <= 1e-8 * r2.c1_plus.norm());
    }

    #[test]
    fn settings_are_validated() {
        let p = inflated();
        let s = solve_steady_state(&p).unwrap();
        let probe = ProbeConfig::new(0.0, 1.0, 0.1 * p.omega_b);
        let d = LinearDynamics::new(&p, &s, &probe);
        let good = TimeDomainSettings::recommended(d.fastest_frequency(), d.slowest_decay());
        let coarse = TimeDomainSettings { step: good.step * 10.0, ..good };
        let short = TimeDomainSettings { duration: good.duration / 10.0, ..good };
        assert!(matches!(integrate_time_domain(&p, &s, &probe, coarse), Err(Error::Integration(_))));
        assert!(matches!(integrate_time_domain(&p, &s, &probe, short), Err(Error::Integration(_))));
    }

    #[test]
    fn short_run_reports_undecayed_transient() {
        // Decoupled cavity x as the slowest mode, so its transient is what the
        // demodulation window sees.
        let p = SystemParams {
            coupling_gamma_1: 0.0,
            coupling_gamma_2: 0.0,
            g_mb_effective_override: Some(ZERO),
            kappa_y: 1e-1 * TAU * 15e6,
            kappa_m: 1e-1 * TAU * 15e6,
            gamma_b: 1e-1 * TAU * 15e6,
            ..inflated()
        };
        let s = solve_steady_state(&p).unwrap();
        let probe = ProbeConfig::new(0.0, 1.0, 0.1 * p.omega_b);
        let d = LinearDynamics::new(&p, &s, &probe);
        let slowest = d.slowest_decay();
        let settings = TimeDomainSettings {
            duration: MIN_DURATION_FACTOR / slowest,
            step: MAX_STEP_FACTOR / d.fastest_frequency(),
        };
        assert!(matches!(
            integrate_linear(&d, settings),
            Err(Error::TransientNotDecayed { .. })
        ));
    }

    #[test]
    fn nonlinear_undriven_decays_to_zero() {
        let p = SystemParams { drive_field: 0.0, sphere_diameter: 125e-6, ..inflated() };
        let est = integrate_full_nonlinear(&p, recommended_nonlinear(&p)).unwrap();
        assert_eq!(est.state.m_s, ZERO);
        assert_eq!(est.state.b_s, ZERO);
    }

    #[test]
    fn nonlinear_without_magnomechanics_matches_linear_steady_state() {
        let p = SystemParams { g_mb: 0.0, ..inflated() };
        let s = solve_steady_state(&p).unwrap();
        let est = integrate_full_nonlinear(&p, recommended_nonlinear(&p)).unwrap();
        assert!((est.state.m_s - s.m_s).norm() <= 1e-8 * s.m_s.norm());
        assert!((est.state.c1_s - s.c1_s).norm() <= 1e-8 * s.c1_s.norm());
        assert_eq!(est.state.b_s, ZERO);
    }

    #[test]
    fn nonlinear_self_consistent_matches_closed_form() {
        let p = SystemParams {
            sphere_diameter: 125e-6,
            drive_detuning_mode: DetuningMode::SelfConsistent,
            ..inflated()
        };
        let s = solve_steady_state(&p).unwrap();
        let est = integrate_full_nonlinear(&p, recommended_nonlinear(&p)).unwrap();
        assert!((est.state.m_s - s.m_s).norm() <= 1e-4 * s.m_s.norm());
        assert!((est.state.delta_m - s.delta_m).abs() <= 1e-4 * p.omega_b);
    }
}
