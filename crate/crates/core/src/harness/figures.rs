//! Canned sweeps that regenerate the data behind the photon-number maps,
//! the transmission spectra, the contrast maps and the η dependence of
//! T_op and P_e.
//!
//! Grid ranges bracket the plotted axes; resolutions are chosen so that the
//! reference points (polariton ridge, points A and B) fall on grid nodes.

use std::f64::consts::PI;
use std::path::Path;

use crate::params::{drive_from_flux_hz, hz, ModelParams};
use crate::steady::Peak;

use super::config::{ModelSetup, ParamKey};
use super::sweep::{run_sweep, write_sweep_files, Axis, Observable, SweepSpec};
use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub sweep: SweepSpec,
}

fn axis(key: ParamKey, start: f64, stop: f64, points: usize) -> Axis {
    Axis::new(key, start, stop, points).expect("canned axis")
}

fn spec(setup: ModelSetup, a1: Axis, a2: Axis, obs: Observable) -> SweepSpec {
    SweepSpec::new(setup, a1, a2, obs).expect("canned sweep")
}

/// Undriven photon-number map over Δ21 ∈ ±150 MHz and g_a ∈ [0, 15] kHz,
/// Δa = Δ21, η = 0.9, at the given Δ31 (Hz).
pub fn photon_map(delta_31_hz: f64) -> SweepSpec {
    let base = ModelParams { drive_amp: 0.0, delta_31: hz(delta_31_hz), ..ModelParams::baseline() };
    let setup = ModelSetup { base, cavity_follows_delta_21: true, peak: None };
    spec(
        setup,
        axis(ParamKey::Delta21, -150e6, 150e6, 301),
        axis(ParamKey::GA, 0.0, 15e3, 151),
        Observable::PhotonNumber,
    )
}

/// Driven transmission over Δ21 ∈ ±150 MHz for η ∈ {−1, −0.5, 0, 0.5, 1}.
pub fn transmission_spectrum(phi: f64) -> SweepSpec {
    let base = ModelParams { phi, ..ModelParams::baseline() };
    let setup = ModelSetup { base, cavity_follows_delta_21: true, peak: None };
    spec(
        setup,
        axis(ParamKey::Delta21, -150e6, 150e6, 601),
        axis(ParamKey::Eta, -1.0, 1.0, 5),
        Observable::Transmission,
    )
}

/// ΔT_op over Ω32 ∈ [0, 100] kHz and ε_d²/2π ∈ [10, 800] MHz at the upper peak.
pub fn contrast_map(kappa_hz: f64) -> SweepSpec {
    let base = ModelParams { kappa_a: hz(kappa_hz), ..ModelParams::baseline() };
    let setup = ModelSetup { base, cavity_follows_delta_21: true, peak: Some(Peak::Upper) };
    spec(
        setup,
        axis(ParamKey::Omega32, 0.0, 100e3, 101),
        axis(ParamKey::DriveFlux, 10e6, 800e6, 80),
        Observable::DeltaTOp,
    )
}

/// `obs` over η ∈ [−1, 1] for φ ∈ {0, π} at point B.
pub fn eta_dependence(obs: Observable) -> SweepSpec {
    let base = ModelParams { drive_amp: drive_from_flux_hz(400e6), ..ModelParams::point_b() };
    let setup = ModelSetup { base, cavity_follows_delta_21: true, peak: Some(Peak::Upper) };
    spec(setup, axis(ParamKey::Eta, -1.0, 1.0, 201), axis(ParamKey::Phi, 0.0, PI, 2), obs)
}

pub fn all_figures() -> Vec<FigureSpec> {
    let mut out = vec![
        FigureSpec { name: "fig2a", description: "photon number, delta_31 = 0", sweep: photon_map(0.0) },
        FigureSpec { name: "fig2b", description: "photon number, delta_31 = -2 MHz", sweep: photon_map(-2e6) },
        FigureSpec { name: "fig2c", description: "photon number, delta_31 = +2 MHz", sweep: photon_map(2e6) },
    ];
    for (name, description, phi) in [
        ("fig3a", "transmission spectrum, phi = 0", 0.0),
        ("fig3b", "transmission spectrum, phi = pi/3", PI / 3.0),
        ("fig3c", "transmission spectrum, phi = 2pi/3", 2.0 * PI / 3.0),
        ("fig3d", "transmission spectrum, phi = pi", PI),
    ] {
        out.push(FigureSpec { name, description, sweep: transmission_spectrum(phi) });
    }
    out.extend([
        FigureSpec { name: "fig4a", description: "contrast map, kappa_a = 1 MHz", sweep: contrast_map(1e6) },
        FigureSpec { name: "fig4b", description: "contrast map, kappa_a = 4 MHz", sweep: contrast_map(4e6) },
        FigureSpec { name: "fig5a", description: "T_op versus eta", sweep: eta_dependence(Observable::TOp) },
        FigureSpec { name: "fig5b", description: "P_e versus eta", sweep: eta_dependence(Observable::PE) },
    ]);
    out
}

pub fn figure(name: &str) -> Option<FigureSpec> {
    all_figures().into_iter().find(|f| f.name == name)
}

/// Runs the named figures (all when `names` is empty) and writes
/// `<dir>/<name>.csv` plus sidecars. Returns (name, bytes) per file.
pub fn write_figures(dir: &Path, names: &[String], workers: usize) -> Result<Vec<(String, u64)>, HarnessError> {
    let selected: Vec<FigureSpec> = if names.is_empty() {
        all_figures()
    } else {
        names
            .iter()
            .map(|n| figure(n).ok_or_else(|| HarnessError::missing(format!("unknown figure `{n}`"))))
            .collect::<Result<_, _>>()?
    };
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();
    for f in selected {
        let result = run_sweep(&f.sweep, workers)?;
        let path = dir.join(format!("{}.csv", f.name));
        let bytes = write_sweep_files(&result, &path)?;
        written.push((f.name.to_string(), bytes));
    }
    Ok(written)
}
