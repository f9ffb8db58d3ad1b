//! TOML run configuration.
//!
//! Frequencies are written as ν in Hz (`*_hz` keys), phases in radians
//! (`*_rad`), the drive as the photon flux ε_d²/2π in Hz. Everything is
//! converted to angular units exactly once, here. The full schema is in
//! `configs/SCHEMA.md`.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{drive_from_flux_hz, hz, to_hz, ModelParams, ParamError};
use crate::spectroscopy::{BeamGeometry, FieldDetunings, RotorSpec, SpectroscopyError};
use crate::steady::{rabi_peak_detuning, Peak};

use super::sweep::{Axis, Observable, SweepSpec};

pub const PRESET_PROPANEDIOL: &str = "propanediol-1,2";

/// A [`ModelParams`] field addressed by its configuration key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ParamKey {
    GA,
    Omega31,
    Omega32,
    Phi,
    DeltaA,
    Delta21,
    Delta31,
    KappaA,
    GammaA,
    GammaB,
    DriveFlux,
    NTotal,
    Eta,
}

impl ParamKey {
    pub const ALL: [ParamKey; 13] = [
        ParamKey::GA,
        ParamKey::Omega31,
        ParamKey::Omega32,
        ParamKey::Phi,
        ParamKey::DeltaA,
        ParamKey::Delta21,
        ParamKey::Delta31,
        ParamKey::KappaA,
        ParamKey::GammaA,
        ParamKey::GammaB,
        ParamKey::DriveFlux,
        ParamKey::NTotal,
        ParamKey::Eta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamKey::GA => "g_a_hz",
            ParamKey::Omega31 => "omega31_hz",
            ParamKey::Omega32 => "omega32_hz",
            ParamKey::Phi => "phi_rad",
            ParamKey::DeltaA => "delta_a_hz",
            ParamKey::Delta21 => "delta_21_hz",
            ParamKey::Delta31 => "delta_31_hz",
            ParamKey::KappaA => "kappa_a_hz",
            ParamKey::GammaA => "gamma_a_hz",
            ParamKey::GammaB => "gamma_b_hz",
            ParamKey::DriveFlux => "drive_flux_hz",
            ParamKey::NTotal => "n_total",
            ParamKey::Eta => "eta",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    fn from_field(field: &str) -> Self {
        match field {
            "g_a" => ParamKey::GA,
            "omega31_rabi" => ParamKey::Omega31,
            "omega32_rabi" => ParamKey::Omega32,
            "phi" => ParamKey::Phi,
            "delta_a" => ParamKey::DeltaA,
            "delta_21" => ParamKey::Delta21,
            "delta_31" => ParamKey::Delta31,
            "kappa_a" => ParamKey::KappaA,
            "gamma_a" => ParamKey::GammaA,
            "gamma_b" => ParamKey::GammaB,
            "drive_amp" => ParamKey::DriveFlux,
            "n_total" => ParamKey::NTotal,
            _ => ParamKey::Eta,
        }
    }

    /// Value in configuration units.
    pub fn get(self, p: &ModelParams) -> f64 {
        match self {
            ParamKey::GA => to_hz(p.g_a),
            ParamKey::Omega31 => to_hz(p.omega31_rabi),
            ParamKey::Omega32 => to_hz(p.omega32_rabi),
            ParamKey::Phi => p.phi,
            ParamKey::DeltaA => to_hz(p.delta_a),
            ParamKey::Delta21 => to_hz(p.delta_21),
            ParamKey::Delta31 => to_hz(p.delta_31),
            ParamKey::KappaA => to_hz(p.kappa_a),
            ParamKey::GammaA => to_hz(p.gamma_a),
            ParamKey::GammaB => to_hz(p.gamma_b),
            // a negative amplitude encodes a negative flux so it is reported as such
            ParamKey::DriveFlux => p.drive_amp.signum() * p.drive_amp * p.drive_amp / TAU,
            ParamKey::NTotal => p.n_total,
            ParamKey::Eta => p.eta,
        }
    }

    /// Sets the field from a value in configuration units.
    pub fn set(self, p: &mut ModelParams, value: f64) {
        match self {
            ParamKey::GA => p.g_a = hz(value),
            ParamKey::Omega31 => p.omega31_rabi = hz(value),
            ParamKey::Omega32 => p.omega32_rabi = hz(value),
            ParamKey::Phi => p.phi = value,
            ParamKey::DeltaA => p.delta_a = hz(value),
            ParamKey::Delta21 => p.delta_21 = hz(value),
            ParamKey::Delta31 => p.delta_31 = hz(value),
            ParamKey::KappaA => p.kappa_a = hz(value),
            ParamKey::GammaA => p.gamma_a = hz(value),
            ParamKey::GammaB => p.gamma_b = hz(value),
            ParamKey::DriveFlux => p.drive_amp = value.signum() * drive_from_flux_hz(value.abs()),
            ParamKey::NTotal => p.n_total = value,
            ParamKey::Eta => p.eta = value,
        }
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("unknown preset `{0}` (available: \"propanediol-1,2\")")]
    UnknownPreset(String),
    #[error("missing required key(s) in [{section}]: {keys}")]
    MissingKeys { section: &'static str, keys: String },
    #[error("`{key}` {reason} (got {value})")]
    Invalid { key: String, reason: &'static str, value: f64 },
    #[error("`{key}`: {message}")]
    BadValue { key: String, message: String },
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } | ConfigError::BadValue { key, .. } => Some(key),
            _ => None,
        }
    }

    fn bad(key: &str, message: impl Into<String>) -> Self {
        ConfigError::BadValue { key: key.to_string(), message: message.into() }
    }
}

/// Routes a [`ParamError`] back to the configuration key that caused it.
pub fn config_error(err: &ParamError, p: &ModelParams) -> ConfigError {
    let key = ParamKey::from_field(err.field());
    let reason = match err {
        ParamError::NotFinite { .. } => "must be finite",
        ParamError::NotPositive { .. } => "must be positive",
        ParamError::Negative { .. } => "must be non-negative",
        ParamError::EtaOutOfRange(_) => "must lie in [-1, 1]",
    };
    ConfigError::Invalid { key: key.name().to_string(), reason, value: key.get(p) }
}

/// Base parameters plus the rules that tie detunings together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSetup {
    pub base: ModelParams,
    /// Δa follows Δ21 (set when `delta_a_hz` is absent).
    pub cavity_follows_delta_21: bool,
    /// Δ21 pinned to ±g_a√N, recomputed after every override.
    pub peak: Option<Peak>,
}

impl ModelSetup {
    pub fn fixed(base: ModelParams) -> Self {
        ModelSetup { base, cavity_follows_delta_21: false, peak: None }
    }

    fn tie(&self, mut p: ModelParams) -> ModelParams {
        if let Some(peak) = self.peak {
            let (up, low) = rabi_peak_detuning(&p);
            p.delta_21 = if peak == Peak::Upper { up } else { low };
        }
        if self.cavity_follows_delta_21 {
            p.delta_a = p.delta_21;
        }
        p
    }

    /// Base parameters with `overrides` applied, detuning rules re-applied,
    /// and the result validated.
    pub fn at(&self, overrides: &[(ParamKey, f64)]) -> Result<ModelParams, ConfigError> {
        let mut p = self.base;
        for &(k, v) in overrides {
            k.set(&mut p, v);
        }
        let p = self.tie(p);
        p.validate().map_err(|e| config_error(&e, &p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoleculeOptions {
    pub rotor: RotorSpec,
    pub geometry: BeamGeometry,
    pub detunings: FieldDetunings,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicsOptions {
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub record_every: usize,
    pub settle_tol: f64,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        DynamicsOptions { t_end: None, dt: None, record_every: 1, settle_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimatorChoice {
    Closed,
    Full,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateOptions {
    pub t_meas: Option<f64>,
    pub sigma_t: Option<f64>,
    pub method: EstimatorChoice,
    pub bracket: (f64, f64),
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { t_meas: None, sigma_t: None, method: EstimatorChoice::Both, bracket: (-1.0, 1.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub model: ModelSetup,
    pub molecule: Option<MoleculeOptions>,
    pub dynamics: DynamicsOptions,
    pub sweep: Option<SweepSpec>,
    pub estimate: EstimateOptions,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    model: Option<RawModel>,
    molecule: Option<RawMolecule>,
    dynamics: Option<RawDynamics>,
    sweep: Option<RawSweep>,
    estimate: Option<RawEstimate>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawModel {
    g_a_hz: Option<f64>,
    omega31_hz: Option<f64>,
    omega32_hz: Option<f64>,
    phi_rad: Option<f64>,
    delta_a_hz: Option<f64>,
    delta_21_hz: Option<f64>,
    delta_31_hz: Option<f64>,
    kappa_a_hz: Option<f64>,
    gamma_a_hz: Option<f64>,
    gamma_b_hz: Option<f64>,
    drive_flux_hz: Option<f64>,
    n_total: Option<f64>,
    eta: Option<f64>,
    peak: Option<String>,
}

impl RawModel {
    fn value(&self, key: ParamKey) -> Option<f64> {
        match key {
            ParamKey::GA => self.g_a_hz,
            ParamKey::Omega31 => self.omega31_hz,
            ParamKey::Omega32 => self.omega32_hz,
            ParamKey::Phi => self.phi_rad,
            ParamKey::DeltaA => self.delta_a_hz,
            ParamKey::Delta21 => self.delta_21_hz,
            ParamKey::Delta31 => self.delta_31_hz,
            ParamKey::KappaA => self.kappa_a_hz,
            ParamKey::GammaA => self.gamma_a_hz,
            ParamKey::GammaB => self.gamma_b_hz,
            ParamKey::DriveFlux => self.drive_flux_hz,
            ParamKey::NTotal => self.n_total,
            ParamKey::Eta => self.eta,
        }
    }

    pub(crate) fn resolve(&self, preset: bool) -> Result<ModelSetup, ConfigError> {
        let peak = match self.peak.as_deref() {
            None => None,
            Some("upper") => Some(Peak::Upper),
            Some("lower") => Some(Peak::Lower),
            Some(other) => {
                return Err(ConfigError::bad("peak", format!("expected \"upper\" or \"lower\", got \"{other}\"")))
            }
        };
        if peak.is_some() && self.delta_21_hz.is_some() {
            return Err(ConfigError::bad("peak", "cannot be combined with an explicit delta_21_hz"));
        }
        // the preset supplies everything except the sample and the drive
        let optional = |k: ParamKey| {
            matches!(k, ParamKey::DeltaA)
                || (k == ParamKey::Delta21 && peak.is_some())
                || (preset && !matches!(k, ParamKey::Eta | ParamKey::DriveFlux))
        };
        let missing: Vec<&str> = ParamKey::ALL
            .into_iter()
            .filter(|&k| self.value(k).is_none() && !optional(k))
            .map(ParamKey::name)
            .collect();
        if !missing.is_empty() {
            return Err(ConfigError::MissingKeys { section: "model", keys: missing.join(", ") });
        }
        let mut p = ModelParams::baseline();
        for k in ParamKey::ALL {
            if let Some(v) = self.value(k) {
                k.set(&mut p, v);
            }
        }
        let setup = ModelSetup { base: p, cavity_follows_delta_21: self.delta_a_hz.is_none(), peak };
        // report the value as written rather than its angular round trip
        let base = setup.at(&[]).map_err(|e| match e {
            ConfigError::Invalid { key, reason, value } => {
                let written = ParamKey::from_name(&key).and_then(|k| self.value(k));
                ConfigError::Invalid { value: written.unwrap_or(value), key, reason }
            }
            other => other,
        })?;
        Ok(ModelSetup { base, ..setup })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMolecule {
    a_hz: Option<f64>,
    b_hz: Option<f64>,
    c_hz: Option<f64>,
    vib_hz: Option<f64>,
    geometry: Option<String>,
    field_delta_21_hz: Option<f64>,
    field_delta_31_hz: Option<f64>,
    margin: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    t_end_s: Option<f64>,
    dt_s: Option<f64>,
    record_every: Option<usize>,
    settle_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    key: String,
    start: f64,
    stop: f64,
    points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    observable: String,
    axis1: RawAxis,
    axis2: RawAxis,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEstimate {
    t_meas: Option<f64>,
    sigma_t: Option<f64>,
    method: Option<String>,
    bracket: Option<[f64; 2]>,
}

fn spectroscopy_error(key: &str, e: SpectroscopyError) -> ConfigError {
    ConfigError::bad(key, e.to_string())
}

fn resolve_molecule(raw: Option<RawMolecule>, preset: bool) -> Result<Option<MoleculeOptions>, ConfigError> {
    let raw = match raw {
        Some(r) => r,
        None if preset => RawMolecule::default(),
        None => return Ok(None),
    };
    let rotor = match (raw.a_hz, raw.b_hz, raw.c_hz, raw.vib_hz) {
        (Some(a), Some(b), Some(c), Some(v)) => {
            RotorSpec::new(hz(a), hz(b), hz(c), hz(v)).map_err(|e| spectroscopy_error("molecule", e))?
        }
        (None, None, None, None) if preset => RotorSpec::propanediol(),
        _ => {
            return Err(ConfigError::MissingKeys {
                section: "molecule",
                keys: "a_hz, b_hz, c_hz, vib_hz (all four, or use the preset)".into(),
            })
        }
    };
    let geometry = match raw.geometry.as_deref() {
        None | Some("perpendicular") => BeamGeometry::perpendicular(),
        Some("collinear") => BeamGeometry::collinear(),
        Some(other) => {
            return Err(ConfigError::bad(
                "geometry",
                format!("expected \"perpendicular\" or \"collinear\", got \"{other}\""),
            ))
        }
    };
    let detunings = FieldDetunings {
        delta_21: hz(raw.field_delta_21_hz.unwrap_or(0.0)),
        delta_31: hz(raw.field_delta_31_hz.unwrap_or(0.0)),
    };
    let margin = raw.margin.unwrap_or(1.0);
    if !(margin > 0.0 && margin <= 1.0) {
        return Err(ConfigError::Invalid { key: "margin".into(), reason: "must lie in (0, 1]", value: margin });
    }
    Ok(Some(MoleculeOptions { rotor, geometry, detunings, margin }))
}

fn positive(key: &str, v: Option<f64>) -> Result<Option<f64>, ConfigError> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => {
            Err(ConfigError::Invalid { key: key.into(), reason: "must be positive", value: x })
        }
        _ => Ok(v),
    }
}

fn resolve_dynamics(raw: Option<RawDynamics>) -> Result<DynamicsOptions, ConfigError> {
    let raw = raw.unwrap_or_default();
    let d = DynamicsOptions::default();
    let record_every = raw.record_every.unwrap_or(d.record_every);
    if record_every == 0 {
        return Err(ConfigError::bad("record_every", "must be at least 1"));
    }
    Ok(DynamicsOptions {
        t_end: positive("t_end_s", raw.t_end_s)?,
        dt: positive("dt_s", raw.dt_s)?,
        record_every,
        settle_tol: positive("settle_tol", raw.settle_tol)?.unwrap_or(d.settle_tol),
    })
}

fn resolve_axis(raw: RawAxis, name: &str) -> Result<Axis, ConfigError> {
    let key = ParamKey::from_name(&raw.key)
        .ok_or_else(|| ConfigError::bad(&format!("{name}.key"), format!("unknown parameter `{}`", raw.key)))?;
    Axis::new(key, raw.start, raw.stop, raw.points).map_err(|m| ConfigError::bad(name, m))
}

fn resolve_sweep(raw: Option<RawSweep>, setup: ModelSetup) -> Result<Option<SweepSpec>, ConfigError> {
    let Some(raw) = raw else { return Ok(None) };
    let observable = Observable::from_name(&raw.observable)
        .ok_or_else(|| ConfigError::bad("observable", format!("unknown observable `{}`", raw.observable)))?;
    let axis1 = resolve_axis(raw.axis1, "axis1")?;
    let axis2 = resolve_axis(raw.axis2, "axis2")?;
    SweepSpec::new(setup, axis1, axis2, observable).map(Some)
}

fn resolve_estimate(raw: Option<RawEstimate>) -> Result<EstimateOptions, ConfigError> {
    let raw = raw.unwrap_or_default();
    let method = match raw.method.as_deref() {
        None | Some("both") => EstimatorChoice::Both,
        Some("closed") => EstimatorChoice::Closed,
        Some("full") => EstimatorChoice::Full,
        Some(other) => {
            return Err(ConfigError::bad(
                "method",
                format!("expected \"closed\", \"full\" or \"both\", got \"{other}\""),
            ))
        }
    };
    for (key, v) in [("t_meas", raw.t_meas), ("sigma_t", raw.sigma_t)] {
        if let Some(x) = v {
            if !(x.is_finite() && x >= 0.0) {
                return Err(ConfigError::Invalid { key: key.into(), reason: "must be non-negative", value: x });
            }
        }
    }
    let bracket = raw.bracket.map_or((-1.0, 1.0), |[lo, hi]| (lo, hi));
    if !(bracket.0 >= -1.0 && bracket.1 <= 1.0 && bracket.0 < bracket.1) {
        return Err(ConfigError::bad("bracket", "must satisfy -1 <= lo < hi <= 1"));
    }
    Ok(EstimateOptions { t_meas: raw.t_meas, sigma_t: raw.sigma_t, method, bracket })
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let preset = match raw.preset.as_deref() {
        None => false,
        Some(PRESET_PROPANEDIOL) => true,
        Some(other) => return Err(ConfigError::UnknownPreset(other.to_string())),
    };
    let model = raw.model.unwrap_or_default().resolve(preset)?;
    Ok(RunConfig {
        preset: raw.preset,
        molecule: resolve_molecule(raw.molecule, preset)?,
        dynamics: resolve_dynamics(raw.dynamics)?,
        sweep: resolve_sweep(raw.sweep, model)?,
        estimate: resolve_estimate(raw.estimate)?,
        model,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, super::HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| super::HarnessError::io(path, e))?;
    Ok(parse_config(&text)?)
}

/// Rebuilds validated parameters from the parameter columns of an emitted
/// sweep row, through the same path as a `[model]` table.
pub fn params_from_row(headers: &csv::StringRecord, row: &csv::StringRecord) -> Result<ModelParams, ConfigError> {
    let mut table = toml::Table::new();
    for (h, v) in headers.iter().zip(row) {
        if ParamKey::from_name(h).is_some() {
            let x: f64 = v.parse().map_err(|_| ConfigError::bad(h, format!("not a number: `{v}`")))?;
            table.insert(h.to_string(), toml::Value::Float(x));
        }
    }
    let raw: RawModel = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    Ok(raw.resolve(false)?.base)
}
