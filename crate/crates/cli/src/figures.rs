//! Canned figure recipes.
//!
//! Every recipe starts from the default parameters in pinned mode and pins
//! the effective couplings: G_mb = 0.32 ω_b when the magnomechanical channel
//! is on, Γ₁ = Γ₂ = 2π × 3.2 MHz, except figure 9 which uses Γ₁ = Γ₂ = 0.18 ω_b.

use std::f64::consts::{PI, TAU};

use anyhow::Result;
use clap::ValueEnum;
use crossmag::sweep::SweepEngine;
use crossmag::{
    solve_steady_state, Axis, AxisKind, Complex64, DetuningMode, Observable, ProbeConfig, SweepSpec, SystemParams,
};

use crate::output::{Cell, ColumnKind, Table};
use crate::plot::{HeatMap, LinePlot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    #[value(name = "2a")]
    F2a,
    #[value(name = "2b")]
    F2b,
    #[value(name = "2c")]
    F2c,
    #[value(name = "3a")]
    F3a,
    #[value(name = "3b")]
    F3b,
    #[value(name = "4a")]
    F4a,
    #[value(name = "4b")]
    F4b,
    #[value(name = "4c")]
    F4c,
    #[value(name = "4d")]
    F4d,
    #[value(name = "5a")]
    F5a,
    #[value(name = "5b")]
    F5b,
    #[value(name = "6a")]
    F6a,
    #[value(name = "6b")]
    F6b,
    #[value(name = "6c")]
    F6c,
    #[value(name = "7a")]
    F7a,
    #[value(name = "7b")]
    F7b,
    #[value(name = "8a")]
    F8a,
    #[value(name = "8b")]
    F8b,
    #[value(name = "8c")]
    F8c,
    #[value(name = "8d")]
    F8d,
    #[value(name = "9")]
    F9,
}

impl FigureId {
    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

pub enum Plot {
    Lines(LinePlot),
    Heat(HeatMap),
}

impl Plot {
    pub fn render(&self) -> String {
        match self {
            Plot::Lines(p) => p.render(),
            Plot::Heat(h) => h.render(),
        }
    }
}

pub struct Figure {
    pub params: SystemParams,
    pub table: Table,
    pub plot: Plot,
}

/// Coupling configuration of one curve.
#[derive(Debug, Clone, Copy)]
struct Couplings {
    gamma_1: f64,
    gamma_2: f64,
    /// In units of ω_b.
    g_eff: f64,
}

const GMB: f64 = 0.32;

fn default_gamma() -> f64 {
    SystemParams::default().coupling_gamma_1
}

fn mit() -> Couplings {
    Couplings { gamma_1: default_gamma(), gamma_2: default_gamma(), g_eff: 0.0 }
}

fn mmit() -> Couplings {
    Couplings { g_eff: GMB, ..mit() }
}

fn params_for(c: Couplings) -> SystemParams {
    let base = SystemParams::default();
    let w = base.omega_b;
    SystemParams {
        coupling_gamma_1: c.gamma_1,
        coupling_gamma_2: c.gamma_2,
        g_mb_effective_override: Some(Complex64::new(c.g_eff * w, 0.0)),
        drive_detuning_mode: DetuningMode::ResolvedSidebandPinned,
        ..base
    }
}

fn engine(c: Couplings) -> Result<(SystemParams, SweepEngine)> {
    let params = params_for(c);
    let steady = solve_steady_state(&params)?;
    let engine = SweepEngine::new(&params, &steady);
    Ok((params, engine))
}

struct Curve {
    label: String,
    couplings: Couplings,
    probe: ProbeConfig,
}

fn curve(label: impl Into<String>, couplings: Couplings, phi: f64, xi: f64) -> Curve {
    Curve { label: label.into(), couplings, probe: ProbeConfig::new(phi, xi, 0.0) }
}

fn phase_label(phi: f64) -> String {
    let k = phi / PI;
    if k == 0.0 {
        "0".into()
    } else {
        format!("{k}pi")
    }
}

/// ξ = 0 plus ξ = 1 at φ ∈ {0, π/2, π, 3π/2}.
fn phase_family(c: Couplings) -> Vec<Curve> {
    let mut curves = vec![curve("xi0", c, 0.0, 0.0)];
    for k in 0..4 {
        let phi = k as f64 * PI / 2.0;
        curves.push(curve(format!("xi1_phi{}", phase_label(phi)), c, phi, 1.0));
    }
    curves
}

/// ξ ∈ {0, 0.5, 1, 1.5, 2} at fixed φ.
fn ratio_family(c: Couplings, phi: f64) -> Vec<Curve> {
    [0.0, 0.5, 1.0, 1.5, 2.0].iter().map(|&xi| curve(format!("xi{xi}"), c, phi, xi)).collect()
}

fn sigma_figure(title: &str, observable: Observable, y_label: &str, curves: Vec<Curve>) -> Result<Figure> {
    let axis = Axis::default_sigma();
    let xs = axis.values();
    let mut columns = vec![
        ("sigma_over_omega_b".to_string(), ColumnKind::Real),
        ("sigma_rad_s".to_string(), ColumnKind::Real),
    ];
    let mut values: Vec<Vec<Option<f64>>> = Vec::new();
    let mut series = Vec::new();
    let mut params = None;
    for c in &curves {
        let (p, engine) = engine(c.couplings)?;
        let result = engine.run(&SweepSpec::one_d(axis, observable, c.probe))?;
        let v: Vec<Option<f64>> = result.nodes.iter().map(|n| n.value.as_ref().ok().copied()).collect();
        columns.push((format!("{}_{}", observable.name(), c.label), ColumnKind::Real));
        series.push(Series {
            label: c.label.clone(),
            points: xs.iter().copied().zip(v.iter().map(|v| v.map(|y| scale(observable, y)))).collect(),
        });
        values.push(v);
        params.get_or_insert(p);
    }
    let params = params.expect("at least one curve");
    let mut table = Table::with_columns("figure-sigma/1", columns);
    for (i, &x) in xs.iter().enumerate() {
        let mut row = vec![Cell::Real(x), Cell::Real(x * params.omega_b)];
        row.extend(values.iter().map(|v| v[i].map_or(Cell::Missing, Cell::Real)));
        table.push(row);
    }
    Ok(Figure {
        params,
        table,
        plot: Plot::Lines(LinePlot {
            title: title.into(),
            x_label: "σ/ω_b".into(),
            y_label: y_label.into(),
            series,
        }),
    })
}

/// Delays are plotted in μs; everything else as is.
fn scale(observable: Observable, y: f64) -> f64 {
    if observable == Observable::GroupDelay {
        y * 1e6
    } else {
        y
    }
}

fn contour_figure(title: &str, c: Couplings, sigma: f64) -> Result<Figure> {
    let (params, engine) = engine(c)?;
    let spec = SweepSpec {
        axis1: Axis::new(AxisKind::Phi, 0.0, TAU, 181),
        axis2: Some(Axis::new(AxisKind::Xi, 0.0, 2.0, 101)),
        observable: Observable::Absorption,
        fixed: ProbeConfig::new(0.0, 0.0, sigma * params.omega_b),
    };
    let result = engine.run(&spec)?;
    let mut table = Table::new(
        "figure-contour/1",
        &[("phi", ColumnKind::Real), ("xi", ColumnKind::Real), ("absorption", ColumnKind::Real)],
    );
    for n in &result.nodes {
        table.push(vec![
            Cell::Real(n.x),
            Cell::Real(n.y.unwrap_or_default()),
            n.value.as_ref().map_or(Cell::Missing, |v| Cell::Real(*v)),
        ]);
    }
    let heat = HeatMap {
        title: title.into(),
        x_label: "φ (rad)".into(),
        y_label: "ξ".into(),
        xs: spec.axis1.values(),
        ys: spec.axis2.expect("2-D").values(),
        values: result.nodes.iter().map(|n| n.value.as_ref().ok().copied()).collect(),
    };
    Ok(Figure { params, table, plot: Plot::Heat(heat) })
}

fn interference_figure(title: &str, c: Couplings, sigma: f64, phi: f64) -> Result<Figure> {
    let (params, engine) = engine(c)?;
    let xs = Axis::new(AxisKind::Xi, 0.0, 1.0, 501).values();
    let mut table = Table::new(
        "figure-interference/1",
        &[
            ("xi", ColumnKind::Real),
            ("intensity", ColumnKind::Real),
            ("t_m_intensity", ColumnKind::Real),
            ("t_ph_intensity", ColumnKind::Real),
        ],
    );
    let labels = ["|T_p|²", "|T_m|²", "|T_ph|²"];
    let mut series: Vec<Series> = labels.iter().map(|l| Series { label: l.to_string(), points: Vec::new() }).collect();
    for &xi in &xs {
        let t = engine.model().transmission(&ProbeConfig::new(phi, xi, sigma * params.omega_b))?;
        let vals = [t.intensity, t.t_m.norm_sqr(), t.t_ph.norm_sqr()];
        let mut row = vec![Cell::Real(xi)];
        for (s, v) in series.iter_mut().zip(vals) {
            s.points.push((xi, Some(v)));
            row.push(Cell::Real(v));
        }
        table.push(row);
    }
    Ok(Figure {
        params,
        table,
        plot: Plot::Lines(LinePlot {
            title: title.into(),
            x_label: "ξ".into(),
            y_label: "intensity".into(),
            series,
        }),
    })
}

pub fn build(id: FigureId) -> Result<Figure> {
    use FigureId::*;
    let g = default_gamma();
    let only_1 = Couplings { gamma_1: g, gamma_2: 0.0, g_eff: 0.0 };
    let absorption = |title: &str, curves| sigma_figure(title, Observable::Absorption, "absorption χ_r", curves);
    match id {
        F2a => absorption(
            "Absorption, ξ = 0, by coupling channel",
            vec![
                curve("gamma1_only", only_1, 0.0, 0.0),
                curve("gamma1_gmb", Couplings { g_eff: GMB, ..only_1 }, 0.0, 0.0),
                curve("gamma1_gamma2", mit(), 0.0, 0.0),
                curve("all_couplings", mmit(), 0.0, 0.0),
            ],
        ),
        F2b => absorption(
            "Absorption, G_mb = 0.32 ω_b, Γ₂ = 0",
            vec![curve("xi0", Couplings { g_eff: GMB, ..only_1 }, 0.0, 0.0)],
        ),
        F2c => absorption("Absorption, G_mb = 0, Γ₂ = Γ₁", vec![curve("xi0", mit(), 0.0, 0.0)]),
        F3a => absorption("Absorption vs phase, G_mb = 0", phase_family(mit())),
        F3b => absorption("Absorption vs phase, G_mb = 0.32 ω_b", phase_family(mmit())),
        F4a => absorption("Absorption vs ξ, φ = 0", ratio_family(mmit(), 0.0)),
        F4b => absorption("Absorption vs ξ, φ = π/2", ratio_family(mmit(), PI / 2.0)),
        F4c => absorption("Absorption vs ξ, φ = π", ratio_family(mmit(), PI)),
        F4d => absorption("Absorption vs ξ, φ = 3π/2", ratio_family(mmit(), 1.5 * PI)),
        F5a => absorption("Absorption vs ξ, φ = 0, G_mb = 0", ratio_family(mit(), 0.0)),
        F5b => absorption("Absorption vs ξ, φ = π, G_mb = 0", ratio_family(mit(), PI)),
        F6a => contour_figure("Absorption at σ = 0, G_mb = 0", mit(), 0.0),
        F6b => contour_figure("Absorption at σ = 0, G_mb = 0.32 ω_b", mmit(), 0.0),
        F6c => contour_figure("Absorption at σ = 0.49 ω_b, G_mb = 0.32 ω_b", mmit(), 0.49),
        F7a => sigma_figure("Transmission, G_mb = 0", Observable::Intensity, "|T_p|²", phase_family(mit())),
        F7b => sigma_figure("Transmission, G_mb = 0.32 ω_b", Observable::Intensity, "|T_p|²", phase_family(mmit())),
        F8a => interference_figure("Interference at σ = 0, φ = 0, G_mb = 0", mit(), 0.0, 0.0),
        F8b => interference_figure("Interference at σ = 0, φ = π, G_mb = 0", mit(), 0.0, PI),
        F8c => interference_figure("Interference at σ = 0.49 ω_b, φ = 0", mmit(), 0.49, 0.0),
        F8d => interference_figure("Interference at σ = 0.49 ω_b, φ = π", mmit(), 0.49, PI),
        F9 => {
            let w = SystemParams::default().omega_b;
            let c = Couplings { gamma_1: 0.18 * w, gamma_2: 0.18 * w, g_eff: GMB };
            let curves = (0..4)
                .map(|k| {
                    let phi = k as f64 * PI / 2.0;
                    curve(format!("phi{}", phase_label(phi)), c, phi, 1.0)
                })
                .collect();
            sigma_figure("Group delay, ξ = 1", Observable::GroupDelay, "τ_g (μs)", curves)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_figure_builds() {
        for id in FigureId::value_variants() {
            let fig = build(*id).unwrap();
            assert!(!fig.table.rows.is_empty(), "{}", id.name());
            assert!(fig.plot.render().contains("</svg>"));
        }
    }

    #[test]
    fn recipes_are_deterministic() {
        let a = build(FigureId::F2b).unwrap().table.to_csv().unwrap();
        let b = build(FigureId::F2b).unwrap().table.to_csv().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phase_labels() {
        assert_eq!(phase_label(0.0), "0");
        assert_eq!(phase_label(PI), "1pi");
        assert_eq!(phase_label(PI / 2.0), "0.5pi");
        assert_eq!(phase_label(1.5 * PI), "1.5pi");
    }
}
