//! Model parameters for N cyclic three-level molecules in a driven ring cavity.
//!
//! Every frequency is stored as an angular frequency in rad/s. Conversion
//! from the ν = ω/2π values used in configuration files happens in
//! [`hz`] / [`drive_from_flux_hz`] and nowhere else.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Converts a frequency ν in Hz to an angular frequency in rad/s.
#[inline]
pub fn hz(nu: f64) -> f64 {
    TAU * nu
}

/// Converts an angular frequency in rad/s back to ν in Hz.
#[inline]
pub fn to_hz(omega: f64) -> f64 {
    omega / TAU
}

/// Drive amplitude ε_d from the photon flux quoted as ε_d²/2π in Hz.
#[inline]
pub fn drive_from_flux_hz(flux_hz: f64) -> f64 {
    (TAU * flux_hz).sqrt()
}

/// Inverse of [`drive_from_flux_hz`].
#[inline]
pub fn flux_hz_from_drive(drive: f64) -> f64 {
    drive * drive / TAU
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{field} must be finite (got {value})")]
    NotFinite { field: &'static str, value: f64 },
    #[error("{field} must be positive (got {value})")]
    NotPositive { field: &'static str, value: f64 },
    #[error("{field} must be non-negative (got {value})")]
    Negative { field: &'static str, value: f64 },
    #[error("eta out of range: {0} is not in [-1, 1]")]
    EtaOutOfRange(f64),
}

impl ParamError {
    /// Name of the offending [`ModelParams`] field.
    pub fn field(&self) -> &'static str {
        match self {
            ParamError::NotFinite { field, .. }
            | ParamError::NotPositive { field, .. }
            | ParamError::Negative { field, .. } => field,
            ParamError::EtaOutOfRange(_) => "eta",
        }
    }
}

/// Couplings, detunings, decay rates, drive and molecule numbers.
///
/// `phi` is the loop phase of the left-handed species; the right-handed
/// species carries `phi + π`. N_L and N_R are always derived from
/// `n_total` and `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g_a: f64,
    pub omega31_rabi: f64,
    pub omega32_rabi: f64,
    pub phi: f64,
    pub delta_a: f64,
    pub delta_21: f64,
    pub delta_31: f64,
    pub kappa_a: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub drive_amp: f64,
    pub n_total: f64,
    pub eta: f64,
}

/// Complex damping constants K_a = iΔa + κ_a, K_A = iΔ21 + Γ_A, K_B = iΔ31 + Γ_B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    pub k_a: C64,
    pub k_big_a: C64,
    pub k_big_b: C64,
}

impl ModelParams {
    /// Working point used throughout the examples: g_a = 2π·10 kHz,
    /// Ω31 = 2π·8 kHz, Ω32 = 2π·20 kHz, Γ_A = Γ_B = 2π·0.1 MHz,
    /// κ_a = 2π·1 MHz, N = 10⁸, Δ31 = 0, Δa = Δ21 = g_a√N (upper polariton),
    /// ε_d²/2π = 400 MHz, η = 0.9, φ = 0.
    pub fn baseline() -> Self {
        let g_a = hz(10e3);
        let n_total: f64 = 1e8;
        let peak = g_a * n_total.sqrt();
        ModelParams {
            g_a,
            omega31_rabi: hz(8e3),
            omega32_rabi: hz(20e3),
            phi: 0.0,
            delta_a: peak,
            delta_21: peak,
            delta_31: 0.0,
            kappa_a: hz(1e6),
            gamma_a: hz(0.1e6),
            gamma_b: hz(0.1e6),
            drive_amp: drive_from_flux_hz(400e6),
            n_total,
            eta: 0.9,
        }
    }

    /// Point A of the contrast map: κ_a = 2π·1 MHz, Ω32 = 2π·25 kHz,
    /// ε_d²/2π = 400 MHz, at the upper polariton peak with φ = 0.
    pub fn point_a() -> Self {
        ModelParams {
            kappa_a: hz(1e6),
            omega32_rabi: hz(25e3),
            drive_amp: drive_from_flux_hz(400e6),
            ..Self::baseline()
        }
    }

    /// Point B of the contrast map: κ_a = 2π·4 MHz, Ω32 = 2π·50 kHz,
    /// ε_d²/2π = 400 MHz. This is also the parameter set used for the
    /// excitation-fraction check.
    pub fn point_b() -> Self {
        ModelParams {
            kappa_a: hz(4e6),
            omega32_rabi: hz(50e3),
            drive_amp: drive_from_flux_hz(400e6),
            ..Self::baseline()
        }
    }

    pub fn validate(self) -> Result<Self, ParamError> {
        let finite = [
            ("g_a", self.g_a),
            ("omega31_rabi", self.omega31_rabi),
            ("omega32_rabi", self.omega32_rabi),
            ("phi", self.phi),
            ("delta_a", self.delta_a),
            ("delta_21", self.delta_21),
            ("delta_31", self.delta_31),
            ("kappa_a", self.kappa_a),
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("drive_amp", self.drive_amp),
            ("n_total", self.n_total),
            ("eta", self.eta),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { field, value });
            }
        }
        for (field, value) in
            [("kappa_a", self.kappa_a), ("gamma_a", self.gamma_a), ("gamma_b", self.gamma_b), ("n_total", self.n_total)]
        {
            if value <= 0.0 {
                return Err(ParamError::NotPositive { field, value });
            }
        }
        for (field, value) in [
            ("g_a", self.g_a),
            ("omega31_rabi", self.omega31_rabi),
            ("omega32_rabi", self.omega32_rabi),
            ("drive_amp", self.drive_amp),
        ] {
            if value < 0.0 {
                return Err(ParamError::Negative { field, value });
            }
        }
        if !(-1.0..=1.0).contains(&self.eta) {
            return Err(ParamError::EtaOutOfRange(self.eta));
        }
        Ok(self)
    }

    /// (N_L, N_R) = (N(1+η)/2, N(1−η)/2).
    pub fn species_counts(&self) -> (f64, f64) {
        let half = 0.5 * self.n_total;
        // max(0) keeps sqrt() real when eta is ±1 up to rounding
        ((half * (1.0 + self.eta)).max(0.0), (half * (1.0 - self.eta)).max(0.0))
    }

    pub fn rate_constants(&self) -> RateConstants {
        RateConstants {
            k_a: C64::new(self.kappa_a, self.delta_a),
            k_big_a: C64::new(self.gamma_a, self.delta_21),
            k_big_b: C64::new(self.gamma_b, self.delta_31),
        }
    }

    /// Loop phases (φ_L, φ_R) = (φ, φ + π).
    pub fn chiral_phases(&self) -> (f64, f64) {
        (self.phi, self.phi + PI)
    }

    /// Collective cavity coupling g_a√N.
    pub fn collective_coupling(&self) -> f64 {
        self.g_a * self.n_total.max(0.0).sqrt()
    }

    pub fn with_eta(self, eta: f64) -> Self {
        ModelParams { eta, ..self }
    }

    pub fn with_phi(self, phi: f64) -> Self {
        ModelParams { phi, ..self }
    }

    /// Moves both the 1↔2 detuning and the cavity detuning to `delta`.
    pub fn with_cavity_locked_detuning(self, delta: f64) -> Self {
        ModelParams { delta_a: delta, delta_21: delta, ..self }
    }
}
