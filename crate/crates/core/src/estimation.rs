//! Inversion of a measured drive transmission into enantiomeric excess.
//!
//! Two estimators are provided: an explicit inverse of the optimal
//! (upper-polariton, strong-coupling) transmission, and a bisection on the
//! full steady-state transmission T(η). The operating phase φ ∈ {0, π} is
//! part of `ModelParams` and is never guessed.

use serde::Serialize;
use thiserror::Error;

use crate::params::ModelParams;
use crate::steady::{
    closed_form_parts, is_monotone_regime, monotonicity_margin, transmission, OptimalTransmissionTerms, SteadyError,
};

/// Bisection stops once the bracket is narrower than this.
pub const ETA_TOLERANCE: f64 = 1e-12;
/// Number of samples used to check monotonicity of T(η) over the bracket.
pub const MONOTONE_SAMPLES: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimationMethod {
    #[serde(rename = "closed-form")]
    ClosedForm,
    #[serde(rename = "full-model-bisection")]
    FullModelBisection,
}

impl EstimationMethod {
    pub fn label(self) -> &'static str {
        match self {
            EstimationMethod::ClosedForm => "closed-form",
            EstimationMethod::FullModelBisection => "full-model-bisection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaEstimate {
    /// Raw estimate; may fall outside [−1, 1] when `in_range` is false.
    pub eta_hat: f64,
    /// `eta_hat` clamped to [−1, 1].
    pub eta_clamped: f64,
    pub method: EstimationMethod,
    pub monotone_regime: bool,
    pub in_range: bool,
    /// |T_predicted(eta_hat) − T_measured|.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error(transparent)]
    Steady(#[from] SteadyError),
    #[error("measured transmission must be finite and non-negative (got {0})")]
    BadMeasurement(f64),
    #[error("parameters violate the monotonicity condition (margin {margin:e} rad²/s²)")]
    NotMonotone { margin: f64 },
    #[error("no chiral signal: N·Ω31·Ω32 = 0, so η cannot be inferred")]
    NoChiralSignal,
    #[error("measured transmission {t_meas} exceeds the attainable maximum {t_max}")]
    AboveMaximum { t_meas: f64, t_max: f64 },
    #[error("measured transmission {t_meas} lies outside [{t_min}, {t_max}] over the bracket")]
    OutsideRange { t_meas: f64, t_min: f64, t_max: f64 },
    #[error("T(eta) is not monotone over the bracket; ambiguous candidates {candidates:?}")]
    Ambiguous { candidates: Vec<f64> },
    #[error("bracket [{0}, {1}] must satisfy -1 <= lo < hi <= 1")]
    BadBracket(f64, f64),
}

fn check_measurement(t_meas: f64) -> Result<(), EstimationError> {
    if t_meas.is_finite() && t_meas >= 0.0 {
        Ok(())
    } else {
        Err(EstimationError::BadMeasurement(t_meas))
    }
}

/// Inverts the optimal-transmission formula for η.
///
/// With X ≥ Y (the monotone regime) the bracketed amplitude X ± Yη is
/// non-negative on [−1, 1], so the non-negative square root is the right
/// branch: η = ±(D·√(T ε²/κ) − X)/Y.
pub fn eta_from_top_closed(t_meas: f64, p: &ModelParams) -> Result<EtaEstimate, EstimationError> {
    check_measurement(t_meas)?;
    let terms = OptimalTransmissionTerms::new(p)?;
    if !is_monotone_regime(p) {
        return Err(EstimationError::NotMonotone { margin: monotonicity_margin(p) });
    }
    if terms.chiral_term == 0.0 {
        return Err(EstimationError::NoChiralSignal);
    }
    let t_max = terms.evaluate(1.0).max(terms.evaluate(-1.0));
    if t_meas > t_max * (1.0 + 1e-12) {
        return Err(EstimationError::AboveMaximum { t_meas, t_max });
    }
    let amplitude = (t_meas / terms.prefactor).sqrt() * terms.denominator;
    let eta_hat = terms.branch.sign() * (amplitude - terms.drive_term) / terms.chiral_term;
    Ok(finish(eta_hat, t_meas, terms.evaluate(eta_hat), EstimationMethod::ClosedForm, p))
}

fn finish(eta_hat: f64, t_meas: f64, t_pred: f64, method: EstimationMethod, p: &ModelParams) -> EtaEstimate {
    // η = ±1 reproduced from T_op(±1) can be off by an ulp
    let in_range = eta_hat.abs() <= 1.0 + 1e-12;
    EtaEstimate {
        eta_hat,
        eta_clamped: eta_hat.clamp(-1.0, 1.0),
        method,
        monotone_regime: is_monotone_regime(p),
        in_range,
        residual: (t_pred - t_meas).abs(),
    }
}

/// Bisection on the full steady-state T(η) over `bracket`.
///
/// T(η) is sampled on [`MONOTONE_SAMPLES`] points first. If it is not
/// monotone there, every crossing is refined and returned inside
/// [`EstimationError::Ambiguous`].
pub fn eta_from_transmission_full(
    t_meas: f64,
    p: &ModelParams,
    bracket: (f64, f64),
) -> Result<EtaEstimate, EstimationError> {
    check_measurement(t_meas)?;
    let (lo, hi) = bracket;
    if !(lo >= -1.0 && hi <= 1.0 && lo < hi) {
        return Err(EstimationError::BadBracket(lo, hi));
    }
    let t_of = |eta: f64| transmission(&p.with_eta(eta));

    let n = MONOTONE_SAMPLES;
    let etas: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let ts = etas.iter().map(|&e| t_of(e)).collect::<Result<Vec<_>, _>>()?;

    let t_min = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12 * t_max;
    let rising = ts.windows(2).all(|w| w[1] >= w[0] - slack);
    let falling = ts.windows(2).all(|w| w[1] <= w[0] + slack);

    let crossings: Vec<(f64, f64)> = etas
        .windows(2)
        .zip(ts.windows(2))
        .filter(|(_, t)| (t[0] - t_meas) * (t[1] - t_meas) <= 0.0 && t[0] != t[1])
        .map(|(e, _)| (e[0], e[1]))
        .collect();

    if !(rising || falling) {
        let mut candidates = Vec::new();
        for (a, b) in crossings {
            let root = bisect(&t_of, t_meas, a, b)?;
            if candidates.last().is_none_or(|&c: &f64| (root - c).abs() > 1e-9) {
                candidates.push(root);
            }
        }
        if candidates.is_empty() {
            return Err(EstimationError::OutsideRange { t_meas, t_min, t_max });
        }
        return Err(EstimationError::Ambiguous { candidates });
    }
    if t_meas < t_min - slack || t_meas > t_max + slack {
        return Err(EstimationError::OutsideRange { t_meas, t_min, t_max });
    }
    let eta_hat = match crossings.first() {
        Some(&(a, b)) => bisect(&t_of, t_meas, a, b)?,
        // within slack of an end point
        None => {
            if (ts[0] - t_meas).abs() <= (ts[n - 1] - t_meas).abs() {
                lo
            } else {
                hi
            }
        }
    };
    Ok(finish(eta_hat, t_meas, t_of(eta_hat)?, EstimationMethod::FullModelBisection, p))
}

fn bisect(
    t_of: &impl Fn(f64) -> Result<f64, SteadyError>,
    target: f64,
    mut a: f64,
    mut b: f64,
) -> Result<f64, SteadyError> {
    let mut fa = t_of(a)? - target;
    if fa == 0.0 {
        return Ok(a);
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= ETA_TOLERANCE || mid == a || mid == b {
            break;
        }
        let fm = t_of(mid)? - target;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// dT/dη of the full transmission, from ⟨a⟩ = (uη + w)/d:
/// dT/dη = (κ_a/ε_d²) · 2 Re(conj(⟨a⟩) · u/d).
pub fn sensitivity(p: &ModelParams, eta: f64) -> Result<f64, EstimationError> {
    if !(p.drive_amp > 0.0) {
        return Err(SteadyError::NoDrive.into());
    }
    let (u, w, d) = closed_form_parts(p);
    if d.norm() == 0.0 {
        return Err(SteadyError::VanishingDenominator.into());
    }
    let a = (u * eta + w) / d;
    Ok(p.kappa_a / (p.drive_amp * p.drive_amp) * 2.0 * (a.conj() * u / d).re)
}

/// First-order η interval for a transmission uncertainty `sigma_t`:
/// η̂ ± σ_T / |dT/dη|, evaluated at the clamped estimate. Unbounded when the
/// sensitivity vanishes.
pub fn eta_interval(estimate: &EtaEstimate, sigma_t: f64, p: &ModelParams) -> Result<(f64, f64), EstimationError> {
    check_measurement(sigma_t)?;
    let slope = sensitivity(p, estimate.eta_clamped)?.abs();
    let half = if slope > 0.0 { sigma_t / slope } else { f64::INFINITY };
    Ok((estimate.eta_hat - half, estimate.eta_hat + half))
}
