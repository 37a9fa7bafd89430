//! Grid evaluation of observables over σ, φ and ξ, plus extremum and
//! zero-crossing location on 1-D sweeps.
//!
//! Sigma coordinates on an axis are in units of ω_b; φ is in radians and ξ is
//! dimensionless.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ProbeConfig, SystemParams};
use crate::response::ResponseModel;
use crate::steady::SteadyState;
use crate::transport::DelayMethod;

/// Coordinate tolerance of golden-section refinement (axis units).
pub const REFINE_TOLERANCE: f64 = 1e-6;
/// Default number of σ nodes; odd so that σ = 0 is a node.
pub const DEFAULT_SIGMA_COUNT: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    Sigma,
    Phi,
    Xi,
}

impl AxisKind {
    pub fn name(self) -> &'static str {
        match self {
            AxisKind::Sigma => "sigma",
            AxisKind::Phi => "phi",
            AxisKind::Xi => "xi",
        }
    }
}

impl FromStr for AxisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma" => Ok(AxisKind::Sigma),
            "phi" => Ok(AxisKind::Phi),
            "xi" => Ok(AxisKind::Xi),
            other => Err(Error::Sweep(format!("unknown axis `{other}` (expected sigma, phi or xi)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Absorption,
    Dispersion,
    Intensity,
    TMIntensity,
    TPhIntensity,
    GroupDelay,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::Absorption,
        Observable::Dispersion,
        Observable::Intensity,
        Observable::TMIntensity,
        Observable::TPhIntensity,
        Observable::GroupDelay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Absorption => "absorption",
            Observable::Dispersion => "dispersion",
            Observable::Intensity => "intensity",
            Observable::TMIntensity => "t_m_intensity",
            Observable::TPhIntensity => "t_ph_intensity",
            Observable::GroupDelay => "group_delay",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Sweep(format!("unknown observable `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub kind: AxisKind,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(kind: AxisKind, start: f64, stop: f64, count: usize) -> Self {
        Axis { kind, start, stop, count }
    }

    /// σ ∈ [−ω_b, ω_b] with the default node count.
    pub fn default_sigma() -> Self {
        Axis::new(AxisKind::Sigma, -1.0, 1.0, DEFAULT_SIGMA_COUNT)
    }

    pub fn values(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        let last = (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + span * (i as f64 / last)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Sweep(format!("{} axis needs count >= 2", self.kind.name())));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::Sweep(format!("{} axis needs finite start < stop", self.kind.name())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub observable: Observable,
    /// Probe values for the coordinates not swept.
    pub fixed: ProbeConfig,
}

impl SweepSpec {
    pub fn one_d(axis: Axis, observable: Observable, fixed: ProbeConfig) -> Self {
        SweepSpec { axis1: axis, axis2: None, observable, fixed }
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.kind == self.axis1.kind {
                return Err(Error::Sweep("2-D sweep axes must differ".into()));
            }
        }
        self.fixed.validate()
    }

    /// Probe at the given axis coordinates.
    pub fn probe_at(&self, x: f64, y: Option<f64>, omega_b: f64) -> ProbeConfig {
        let mut probe = self.fixed;
        let mut set = |kind: AxisKind, v: f64| match kind {
            AxisKind::Sigma => probe.sigma = v * omega_b,
            AxisKind::Phi => probe.phi = v,
            AxisKind::Xi => probe.xi = v,
        };
        set(self.axis1.kind, x);
        if let (Some(a2), Some(y)) = (&self.axis2, y) {
            set(a2.kind, y);
        }
        probe
    }
}

/// Why a node has no value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum NodeError {
    /// Transmission zero; the group delay is undefined.
    Singular,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridNode {
    pub x: f64,
    pub y: Option<f64>,
    pub value: std::result::Result<f64, NodeError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub coordinate: f64,
    pub value: f64,
    pub kind: ExtremumKind,
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Row-major over (axis2, axis1): axis1 varies fastest.
    pub nodes: Vec<GridNode>,
    /// Discrete extrema of 1-D sweeps; empty for 2-D.
    pub extrema: Vec<Extremum>,
    /// Linearly interpolated sign changes of 1-D sweeps; empty for 2-D.
    pub zero_crossings: Vec<f64>,
}

/// Evaluates observables for one resolved steady state.
#[derive(Debug, Clone, Copy)]
pub struct SweepEngine {
    model: ResponseModel,
    omega_b: f64,
}

impl SweepEngine {
    pub fn new(params: &SystemParams, steady: &SteadyState) -> Self {
        SweepEngine {
            model: ResponseModel::new(params, steady),
            omega_b: params.omega_b,
        }
    }

    pub fn model(&self) -> &ResponseModel {
        &self.model
    }

    pub fn omega_b(&self) -> f64 {
        self.omega_b
    }

    pub fn evaluate(&self, probe: &ProbeConfig, observable: Observable) -> std::result::Result<f64, NodeError> {
        let failed = |e: Error| NodeError::Failed(e.to_string());
        match observable {
            Observable::Absorption | Observable::Dispersion => {
                let r = self.model.response(probe).map_err(failed)?;
                Ok(if observable == Observable::Absorption { r.chi_r } else { r.chi_i })
            }
            Observable::Intensity | Observable::TMIntensity | Observable::TPhIntensity => {
                let t = self.model.transmission(probe).map_err(failed)?;
                Ok(match observable {
                    Observable::Intensity => t.intensity,
                    Observable::TMIntensity => t.t_m.norm_sqr(),
                    _ => t.t_ph.norm_sqr(),
                })
            }
            Observable::GroupDelay => {
                let t = self
                    .model
                    .group_delay(probe, DelayMethod::Analytic, self.omega_b)
                    .map_err(failed)?;
                t.tau_g.ok_or(NodeError::Singular)
            }
        }
    }

    pub fn run(&self, spec: &SweepSpec) -> Result<SweepResult> {
        spec.validate()?;
        let xs = spec.axis1.values();
        let ys: Vec<Option<f64>> = match &spec.axis2 {
            Some(a2) => a2.values().into_iter().map(Some).collect(),
            None => vec![None],
        };
        let coords: Vec<(f64, Option<f64>)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
        let nodes: Vec<GridNode> = coords
            .par_iter()
            .map(|&(x, y)| GridNode {
                x,
                y,
                value: self.evaluate(&spec.probe_at(x, y, self.omega_b), spec.observable),
            })
            .collect();

        let (extrema, zero_crossings) = if spec.axis2.is_none() {
            (discrete_extrema(&nodes), zero_crossings(&nodes))
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(SweepResult {
            spec: *spec,
            nodes,
            extrema,
            zero_crossings,
        })
    }

    /// Extrema of a 1-D sweep; with `refine`, each discrete extremum is
    /// polished by golden-section search on the continuous observable.
    pub fn locate_extrema(&self, result: &SweepResult, refine: bool) -> Result<Vec<Extremum>> {
        if result.nodes.is_empty() {
            return Err(Error::Sweep("cannot locate extrema on an empty grid".into()));
        }
        if result.spec.axis2.is_some() {
            return Err(Error::Sweep("extremum location is defined for 1-D sweeps only".into()));
        }
        let found = discrete_extrema(&result.nodes);
        if !refine {
            return Ok(found);
        }
        let spec = &result.spec;
        let step = (spec.axis1.stop - spec.axis1.start) / (spec.axis1.count - 1) as f64;
        let value_at = |x: f64| self.evaluate(&spec.probe_at(x, None, self.omega_b), spec.observable);
        Ok(found
            .into_iter()
            .map(|e| {
                let lo = (e.coordinate - step).max(spec.axis1.start);
                let hi = (e.coordinate + step).min(spec.axis1.stop);
                let sign = if e.kind == ExtremumKind::Minimum { 1.0 } else { -1.0 };
                let objective = |x: f64| value_at(x).map(|v| sign * v).unwrap_or(f64::INFINITY);
                let x = golden_section(objective, lo, hi, REFINE_TOLERANCE);
                match value_at(x) {
                    Ok(v) if sign * v <= sign * e.value => Extremum {
                        coordinate: x,
                        value: v,
                        kind: e.kind,
                        refined: true,
                    },
                    _ => e,
                }
            })
            .collect())
    }
}

/// Minimizes a unimodal function on [lo, hi] to the given coordinate tolerance.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

fn valid_points(nodes: &[GridNode]) -> Vec<(f64, f64)> {
    nodes
        .iter()
        .filter_map(|n| n.value.as_ref().ok().map(|&v| (n.x, v)))
        .collect()
}

fn discrete_extrema(nodes: &[GridNode]) -> Vec<Extremum> {
    let pts = valid_points(nodes);
    let mut out = Vec::new();
    // Index of the last point where the slope sign changed, and that sign.
    let mut last_sign = 0.0;
    let mut plateau_start = 0;
    for i in 1..pts.len() {
        let diff = pts[i].1 - pts[i - 1].1;
        if diff == 0.0 {
            continue;
        }
        let sign = diff.signum();
        if last_sign != 0.0 && sign != last_sign {
            // The turning point is the node before this step (or the middle of a plateau).
            let j = (plateau_start + i - 1) / 2;
            let kind = if last_sign > 0.0 { ExtremumKind::Maximum } else { ExtremumKind::Minimum };
            out.push(Extremum {
                coordinate: pts[j].0,
                value: pts[j].1,
                kind,
                refined: false,
            });
        }
        if sign != last_sign {
            last_sign = sign;
        }
        plateau_start = i;
    }
    out
}

fn zero_crossings(nodes: &[GridNode]) -> Vec<f64> {
    let pts = valid_points(nodes);
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let ((x0, v0), (x1, v1)) = (w[0], w[1]);
        if v0 == 0.0 {
            out.push(x0);
        } else if v0 * v1 < 0.0 {
            out.push(x0 - v0 * (x1 - x0) / (v1 - v0));
        }
    }
    if let Some(&(x, v)) = pts.last() {
        if v == 0.0 {
            out.push(x);
        }
    }
    out
}

pub fn run_sweep(params: &SystemParams, steady: &SteadyState, spec: &SweepSpec) -> Result<SweepResult> {
    SweepEngine::new(params, steady).run(spec)
}

pub fn locate_extrema(
    params: &SystemParams,
    steady: &SteadyState,
    result: &SweepResult,
    refine: bool,
) -> Result<Vec<Extremum>> {
    SweepEngine::new(params, steady).locate_extrema(result, refine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::solve_steady_state;
    use num_complex::Complex64;
    use std::f64::consts::{PI, TAU};

    fn engine(gamma_2: f64, g_eff: f64) -> (SystemParams, SweepEngine) {
        let p = SystemParams {
            coupling_gamma_2: gamma_2,
            g_mb_effective_override: Some(Complex64::new(g_eff, 0.0)),
            ..Default::default()
        };
        let s = solve_steady_state(&p).unwrap();
        let e = SweepEngine::new(&p, &s);
        (p, e)
    }

    fn node(x: f64, v: f64) -> GridNode {
        GridNode { x, y: None, value: Ok(v) }
    }

    #[test]
    fn axis_values_pin_center() {
        let v = Axis::default_sigma().values();
        assert_eq!(v.len(), 2001);
        assert_eq!(v[1000], 0.0);
        assert_eq!(v[0], -1.0);
        assert_eq!(v[2000], 1.0);
    }

    #[test]
    fn spec_validation() {
        let probe = ProbeConfig::default();
        let bad_count = SweepSpec::one_d(Axis::new(AxisKind::Sigma, -1.0, 1.0, 1), Observable::Absorption, probe);
        assert!(bad_count.validate().is_err());
        let reversed = SweepSpec::one_d(Axis::new(AxisKind::Phi, 1.0, 0.0, 10), Observable::Absorption, probe);
        assert!(reversed.validate().is_err());
        let same = SweepSpec {
            axis2: Some(Axis::new(AxisKind::Sigma, 0.0, 1.0, 3)),
            ..SweepSpec::one_d(Axis::new(AxisKind::Sigma, -1.0, 1.0, 3), Observable::Absorption, probe)
        };
        assert!(same.validate().is_err());
    }

    #[test]
    fn monotone_grid_has_no_extrema() {
        let nodes: Vec<_> = (0..10).map(|i| node(i as f64, (i * i) as f64)).collect();
        assert!(discrete_extrema(&nodes).is_empty());
    }

    #[test]
    fn plateau_extremum_reported_once() {
        let vals = [3.0, 1.0, 1.0, 1.0, 2.0];
        let nodes: Vec<_> = vals.iter().enumerate().map(|(i, &v)| node(i as f64, v)).collect();
        let e = discrete_extrema(&nodes);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].kind, ExtremumKind::Minimum);
        assert_eq!(e[0].coordinate, 2.0);
    }

    #[test]
    fn zero_crossings_interpolate() {
        let nodes = vec![node(0.0, -1.0), node(1.0, 1.0), node(2.0, 3.0), node(3.0, 0.0)];
        assert_eq!(zero_crossings(&nodes), vec![0.5, 3.0]);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_section(|x| (x - 0.3).powi(2), -1.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn double_window_is_symmetric_without_second_probe() {
        let (p, e) = engine(0.0, 0.32 * TAU * 15e6);
        let spec = SweepSpec::one_d(Axis::default_sigma(), Observable::Absorption, ProbeConfig::default());
        let r = e.run(&spec).unwrap();
        let n = r.nodes.len();
        for i in 0..n {
            let a = r.nodes[i].value.clone().unwrap();
            let b = r.nodes[n - 1 - i].value.clone().unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
        let minima: Vec<_> = r.extrema.iter().filter(|x| x.kind == ExtremumKind::Minimum).collect();
        assert_eq!(minima.len(), 2);
        assert!((minima[0].coordinate + minima[1].coordinate).abs() < 1e-12);
        let _ = p;
    }

    #[test]
    fn lossless_limit_puts_dips_at_effective_coupling() {
        // With the magnon and phonon losses shrunk, the transparency dips move
        // onto σ = ±G_mb.
        let g = 0.32 * TAU * 15e6;
        let p = SystemParams {
            coupling_gamma_2: 0.0,
            kappa_m: TAU * 1e2,
            gamma_b: TAU * 1e-2,
            g_mb_effective_override: Some(Complex64::new(g, 0.0)),
            ..Default::default()
        };
        let s = solve_steady_state(&p).unwrap();
        let e = SweepEngine::new(&p, &s);
        let spec = SweepSpec::one_d(Axis::default_sigma(), Observable::Absorption, ProbeConfig::default());
        let r = e.run(&spec).unwrap();
        let refined = e.locate_extrema(&r, true).unwrap();
        let dips: Vec<f64> = refined
            .iter()
            .filter(|x| x.kind == ExtremumKind::Minimum)
            .map(|x| x.coordinate)
            .collect();
        assert_eq!(dips.len(), 2);
        for d in dips {
            assert!((d.abs() - 0.32).abs() < 1e-4, "{d}");
        }
    }

    #[test]
    fn phase_sweep_at_opacity_point() {
        let (_, e) = engine(TAU * 3.2e6, 0.0);
        let spec = SweepSpec::one_d(
            Axis::new(AxisKind::Phi, 0.0, TAU, 361),
            Observable::Absorption,
            ProbeConfig::new(0.0, 1.0, 0.0),
        );
        let r = e.run(&spec).unwrap();
        let values: Vec<f64> = r.nodes.iter().map(|n| n.value.clone().unwrap()).collect();
        let (imin, _) = values.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
        let (imax, _) = values.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        let phi_min = r.nodes[imin].x;
        let phi_max = r.nodes[imax].x;
        assert!(phi_min < 0.1 || phi_min > TAU - 0.1, "{phi_min}");
        assert!((phi_max - PI).abs() < 0.1, "{phi_max}");
    }

    #[test]
    fn two_d_grid_ordering() {
        let (_, e) = engine(TAU * 3.2e6, 0.0);
        let spec = SweepSpec {
            axis1: Axis::new(AxisKind::Phi, 0.0, TAU, 5),
            axis2: Some(Axis::new(AxisKind::Xi, 0.0, 2.0, 3)),
            observable: Observable::Absorption,
            fixed: ProbeConfig::default(),
        };
        let r = e.run(&spec).unwrap();
        assert_eq!(r.nodes.len(), 15);
        assert_eq!(r.nodes[0].y, Some(0.0));
        assert_eq!(r.nodes[4].x, TAU);
        assert_eq!(r.nodes[5].y, Some(1.0));
        assert!(r.extrema.is_empty());
        assert!(e.locate_extrema(&r, false).is_err());
    }

    #[test]
    fn singular_delay_nodes_are_marked() {
        let p = SystemParams { coupling_gamma_1: 0.0, ..Default::default() };
        let s = solve_steady_state(&p).unwrap();
        let e = SweepEngine::new(&p, &s);
        let spec = SweepSpec::one_d(Axis::new(AxisKind::Sigma, -1.0, 1.0, 11), Observable::GroupDelay, ProbeConfig::default());
        let r = e.run(&spec).unwrap();
        assert_eq!(r.nodes[5].value, Err(NodeError::Singular));
        assert!(r.nodes[4].value.is_ok());
    }

    #[test]
    fn empty_grid_is_an_error() {
        let (_, e) = engine(0.0, 0.0);
        let spec = SweepSpec::one_d(Axis::default_sigma(), Observable::Absorption, ProbeConfig::default());
        let mut r = e.run(&spec).unwrap();
        r.nodes.clear();
        assert!(e.locate_extrema(&r, true).is_err());
    }
}
