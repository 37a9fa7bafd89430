//! TOML config documents.
//!
//! Frequencies are ordinary frequencies in Hz unless tagged:
//!
//! ```toml
//! [damping]
//! kappa_x = 2.1e6                       # Hz, converted to 2π × 2.1e6 rad/s
//! gamma_b = { omega_b = 1e-5 }          # in units of the phonon frequency
//! [couplings]
//! g_mb_effective = { rad_per_s = 3.0e7 } # already angular
//! ```
//!
//! Sweep coordinates are the exception: σ bounds on a sweep axis are given in
//! units of ω_b. Unknown keys are rejected. See `config/schema.md` for the
//! full key list.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{amplitude_ratio, DetuningMode, ProbeConfig, SystemParams};
use crate::sweep::{Axis, AxisKind, Observable, SweepSpec, DEFAULT_SIGMA_COUNT};

/// A frequency as written in a config document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Frequency {
    /// Plain number: ordinary frequency in Hz.
    Hz(f64),
    Tagged(TaggedFrequency),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaggedFrequency {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rad_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_b: Option<f64>,
}

impl Frequency {
    pub fn angular(value: f64) -> Self {
        Frequency::Tagged(TaggedFrequency {
            rad_per_s: Some(value),
            ..Default::default()
        })
    }

    /// Resolves to rad/s. `omega_b` is `None` while ω_b itself is being resolved.
    fn resolve(&self, key: &str, omega_b: Option<f64>) -> Result<f64> {
        match *self {
            Frequency::Hz(v) => Ok(TAU * v),
            Frequency::Tagged(t) => match (t.hz, t.rad_per_s, t.omega_b) {
                (Some(v), None, None) => Ok(TAU * v),
                (None, Some(v), None) => Ok(v),
                (None, None, Some(v)) => match omega_b {
                    Some(w) => Ok(v * w),
                    None => Err(Error::invalid(key, "cannot be expressed in units of itself")),
                },
                _ => Err(Error::invalid(key, "tag exactly one of `hz`, `rad_per_s`, `omega_b`")),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<ModesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<DampingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<CouplingsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_cavity_1: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_cavity_2: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_b: Option<Frequency>,
    /// Tesla.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_field: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_x: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_y: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_m: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_b: Option<Frequency>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_1: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_2: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_mb: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_mb_effective: Option<Frequency>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Tesla.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_field: Option<f64>,
    /// Frequency per tesla (γ_g/2π in Hz/T when untagged).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gyromagnetic_ratio: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_mode: Option<DetuningMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bare_magnon_detuning: Option<Frequency>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_diameter: Option<f64>,
    /// Kelvin; accepted and unused.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Frequency>,
    /// Watts; together with `power_y` an alternative to `xi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: AxisKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<Observable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<AxisSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub name: AxisKind,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Validated result of loading a config document.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub params: SystemParams,
    pub probe: ProbeConfig,
    pub sweep: SweepSpec,
}

/// Default bounds of an axis when the document gives none.
pub fn default_axis(kind: AxisKind) -> Axis {
    match kind {
        AxisKind::Sigma => Axis::default_sigma(),
        AxisKind::Phi => Axis::new(AxisKind::Phi, 0.0, TAU, 361),
        AxisKind::Xi => Axis::new(AxisKind::Xi, 0.0, 2.0, 201),
    }
}

fn map_de_error(err: serde_path_to_error::Error<toml::de::Error>) -> Error {
    let path = err.path().to_string();
    let message = err.inner().message().to_string();
    if let Some(rest) = message.strip_prefix("missing field `") {
        let field = rest.split('`').next().unwrap_or(rest);
        let full = if path == "." || path.is_empty() { field.to_string() } else { format!("{path}.{field}") };
        return Error::MissingField(full);
    }
    Error::Config { path, message }
}

pub fn parse_document(text: &str) -> Result<ConfigDocument> {
    let value: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config {
        path: ".".into(),
        message: e.message().to_string(),
    })?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        // Deserializing from a parsed table yields toml::de::Error already.
        map_de_error(e)
    })
}

/// Parses, fills defaults and validates.
pub fn load_config(text: &str) -> Result<LoadedConfig> {
    resolve(&parse_document(text)?)
}

fn set_freq(slot: &mut f64, value: &Option<Frequency>, key: &str, omega_b: Option<f64>) -> Result<()> {
    if let Some(v) = value {
        *slot = v.resolve(key, omega_b)?;
    }
    Ok(())
}

fn set_plain(slot: &mut f64, value: Option<f64>) {
    if let Some(v) = value {
        *slot = v;
    }
}

pub fn resolve(doc: &ConfigDocument) -> Result<LoadedConfig> {
    let mut p = SystemParams::default();
    let modes = doc.modes.clone().unwrap_or_default();
    set_freq(&mut p.omega_b, &modes.omega_b, "modes.omega_b", None)?;
    let wb = Some(p.omega_b);
    // Defaults that scale with ω_b follow an overridden ω_b.
    p.gamma_b = 1e-5 * p.omega_b;
    p.bare_magnon_detuning = p.omega_b;

    set_freq(&mut p.omega_cavity_1, &modes.omega_cavity_1, "modes.omega_cavity_1", wb)?;
    set_freq(&mut p.omega_cavity_2, &modes.omega_cavity_2, "modes.omega_cavity_2", wb)?;
    p.bias_field = modes.bias_field;

    let damping = doc.damping.clone().unwrap_or_default();
    set_freq(&mut p.kappa_x, &damping.kappa_x, "damping.kappa_x", wb)?;
    set_freq(&mut p.kappa_y, &damping.kappa_y, "damping.kappa_y", wb)?;
    set_freq(&mut p.kappa_m, &damping.kappa_m, "damping.kappa_m", wb)?;
    set_freq(&mut p.gamma_b, &damping.gamma_b, "damping.gamma_b", wb)?;

    let couplings = doc.couplings.clone().unwrap_or_default();
    set_freq(&mut p.coupling_gamma_1, &couplings.gamma_1, "couplings.gamma_1", wb)?;
    set_freq(&mut p.coupling_gamma_2, &couplings.gamma_2, "couplings.gamma_2", wb)?;
    set_freq(&mut p.g_mb, &couplings.g_mb, "couplings.g_mb", wb)?;
    if let Some(g) = &couplings.g_mb_effective {
        let value = g.resolve("couplings.g_mb_effective", wb)?;
        p.g_mb_effective_override = Some(Complex64::new(value, 0.0));
    }

    let drive = doc.drive.clone().unwrap_or_default();
    set_plain(&mut p.drive_field, drive.drive_field);
    set_freq(&mut p.gyromagnetic_ratio, &drive.gyromagnetic_ratio, "drive.gyromagnetic_ratio", None)?;
    if let Some(mode) = drive.detuning_mode {
        p.drive_detuning_mode = mode;
    }
    set_freq(&mut p.bare_magnon_detuning, &drive.bare_magnon_detuning, "drive.bare_magnon_detuning", wb)?;

    let material = doc.material.clone().unwrap_or_default();
    set_plain(&mut p.spin_density, material.spin_density);
    set_plain(&mut p.sphere_diameter, material.sphere_diameter);
    if material.temperature.is_some() {
        p.temperature = material.temperature;
    }
    p.validate()?;

    let probe_section = doc.probe.clone().unwrap_or_default();
    let mut probe = ProbeConfig::default();
    set_plain(&mut probe.phi, probe_section.phi);
    set_freq(&mut probe.sigma, &probe_section.sigma, "probe.sigma", wb)?;
    match (probe_section.xi, probe_section.power_x, probe_section.power_y) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Error::invalid("probe.xi", "give either `xi` or `power_x`/`power_y`, not both"))
        }
        (Some(xi), None, None) => probe.xi = xi,
        (None, Some(px), Some(py)) => probe.xi = amplitude_ratio(&p, px, py)?,
        (None, Some(_), None) => return Err(Error::MissingField("probe.power_y".into())),
        (None, None, Some(_)) => return Err(Error::MissingField("probe.power_x".into())),
        (None, None, None) => {}
    }
    probe.validate()?;

    let sweep = match &doc.sweep {
        None => SweepSpec::one_d(Axis::default_sigma(), Observable::Absorption, probe),
        Some(s) => {
            let d = default_axis(s.axis);
            let axis1 = Axis::new(
                s.axis,
                s.start.unwrap_or(d.start),
                s.stop.unwrap_or(d.stop),
                s.count.unwrap_or(if s.axis == AxisKind::Sigma { DEFAULT_SIGMA_COUNT } else { d.count }),
            );
            let axis2 = s.axis2.as_ref().map(|a| Axis::new(a.name, a.start, a.stop, a.count));
            SweepSpec {
                axis1,
                axis2,
                observable: s.observable.unwrap_or(Observable::Absorption),
                fixed: probe,
            }
        }
    };
    sweep.validate()?;

    Ok(LoadedConfig { params: p, probe, sweep })
}

/// Serializes a parameter bundle with every frequency tagged as angular, so
/// that loading the result reproduces the same values bit for bit.
pub fn to_document(params: &SystemParams, probe: &ProbeConfig, sweep: Option<&SweepSpec>) -> ConfigDocument {
    let f = |v: f64| Some(Frequency::angular(v));
    ConfigDocument {
        modes: Some(ModesSection {
            omega_cavity_1: f(params.omega_cavity_1),
            omega_cavity_2: f(params.omega_cavity_2),
            omega_b: f(params.omega_b),
            bias_field: params.bias_field,
        }),
        damping: Some(DampingSection {
            kappa_x: f(params.kappa_x),
            kappa_y: f(params.kappa_y),
            kappa_m: f(params.kappa_m),
            gamma_b: f(params.gamma_b),
        }),
        couplings: Some(CouplingsSection {
            gamma_1: f(params.coupling_gamma_1),
            gamma_2: f(params.coupling_gamma_2),
            g_mb: f(params.g_mb),
            // Only |G_mb| enters the response; the override is stored real.
            g_mb_effective: params.g_mb_effective_override.map(|g| Frequency::angular(g.norm())),
        }),
        drive: Some(DriveSection {
            drive_field: Some(params.drive_field),
            gyromagnetic_ratio: f(params.gyromagnetic_ratio),
            detuning_mode: Some(params.drive_detuning_mode),
            bare_magnon_detuning: f(params.bare_magnon_detuning),
        }),
        material: Some(MaterialSection {
            spin_density: Some(params.spin_density),
            sphere_diameter: Some(params.sphere_diameter),
            temperature: params.temperature,
        }),
        probe: Some(ProbeSection {
            phi: Some(probe.phi),
            xi: Some(probe.xi),
            sigma: f(probe.sigma),
            power_x: None,
            power_y: None,
        }),
        sweep: sweep.map(|s| SweepSection {
            axis: s.axis1.kind,
            start: Some(s.axis1.start),
            stop: Some(s.axis1.stop),
            count: Some(s.axis1.count),
            observable: Some(s.observable),
            axis2: s.axis2.map(|a| AxisSection {
                name: a.kind,
                start: a.start,
                stop: a.stop,
                count: a.count,
            }),
        }),
    }
}

pub fn to_toml(doc: &ConfigDocument) -> String {
    // Section tables are plain structs of scalars and inline tables, which
    // toml always knows how to serialize.
    let body = toml::to_string(doc).expect("config document serializes");
    let mut out = String::new();
    let _ = writeln!(out, "# Angular frequencies are tagged `rad_per_s`; untagged numbers would be read as Hz.");
    out.push_str(&body);
    out
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn angular_values_round_trip_exactly(
            kx in 1e3f64..1e8, ky in 1e3f64..1e8, km in 1e3f64..1e8, gb in 1e-2f64..1e6,
            g1 in 0.0f64..1e8, g2 in 0.0f64..1e8, sigma in -1e8f64..1e8, phi in -7.0f64..7.0,
            xi in 0.0f64..3.0, d in 1e-5f64..1e-3, gover in proptest::option::of(0.0f64..1e8),
        ) {
            let params = SystemParams {
                kappa_x: kx, kappa_y: ky, kappa_m: km, gamma_b: gb,
                coupling_gamma_1: g1, coupling_gamma_2: g2, sphere_diameter: d,
                omega_b: 2e8,
                g_mb_effective_override: gover.map(|g| Complex64::new(g, 0.0)),
                ..Default::default()
            };
            let probe = ProbeConfig::new(phi, xi, sigma);
            let text = to_toml(&to_document(&params, &probe, None));
            let loaded = load_config(&text).unwrap();
            prop_assert_eq!(loaded.params, params);
            prop_assert_eq!(loaded.probe, probe);
        }
    }
}
