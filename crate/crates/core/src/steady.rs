//! Mean-field steady state of the cavity mode and the four collective
//! molecular modes, and the transmission observables built on it.
//!
//! The mean-value vector is ordered v = (a, A_L, A_R, B_L, B_R) and obeys
//! dv/dt = M·v + s with
//!
//! ```text
//! ȧ   = −K_a a − i g_a (√N_L A_L + √N_R A_R) + √κ_a ε_d
//! Ȧ_Q = −K_A A_Q − i g_a √N_Q a − i Ω32 e^{−iφ_Q} B_Q
//! Ḃ_Q = −K_B B_Q − i Ω31 √N_Q − i Ω32 e^{+iφ_Q} A_Q
//! ```
//!
//! Two independent routes give the steady state: a dense 5×5 solve of
//! M·v = −s ([`solve_steady_linear`]) and the closed-form cavity amplitude
//! ([`intracavity_amplitude_closed`]). Their agreement is tested, not assumed.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, CMatrix, CVector, LinalgError};
use crate::params::ModelParams;

pub const MODES: usize = 5;
pub const IDX_A: usize = 0;
pub const IDX_AL: usize = 1;
pub const IDX_AR: usize = 2;
pub const IDX_BL: usize = 3;
pub const IDX_BR: usize = 4;

/// Steady states with P_e above this carry a low-excitation warning.
pub const EXCITATION_WARNING: f64 = 0.1;

/// Tolerance (rad) when deciding whether φ is a multiple of π.
pub const PHASE_BRANCH_TOL: f64 = 1e-9;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("closed-form denominator vanishes")]
    VanishingDenominator,
    #[error("transmission is undefined without a drive (drive_amp = 0)")]
    NoDrive,
    #[error("phi = {0} rad is not a multiple of pi; the optimal-transmission approximation does not apply")]
    PhaseNotMultipleOfPi(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSystem {
    pub matrix: CMatrix<MODES>,
    pub source: CVector<MODES>,
}

impl DriftSystem {
    /// M·v + s.
    pub fn apply(&self, v: &CVector<MODES>) -> CVector<MODES> {
        let mv = linalg::mat_vec(&self.matrix, v);
        std::array::from_fn(|i| mv[i] + self.source[i])
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>, LinalgError> {
        linalg::eigenvalues(&self.matrix)
    }

    /// Largest real part among the eigenvalues; negative for a damped system.
    pub fn spectral_abscissa(&self) -> Result<f64, LinalgError> {
        Ok(self.eigenvalues()?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
    }

    /// Largest entry magnitude of the matrix, the fastest rate in the system.
    pub fn max_rate(&self) -> f64 {
        self.matrix.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest |Re| on the diagonal, the slowest bare damping rate.
    pub fn min_damping(&self) -> f64 {
        (0..MODES).map(|i| self.matrix[i][i].re.abs()).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    #[serde(serialize_with = "ser_modes")]
    pub amplitudes: CVector<MODES>,
    /// ‖M·v + s‖ / ‖s‖ (absolute when s = 0).
    pub residual: f64,
}

fn ser_modes<S: serde::Serializer>(v: &CVector<MODES>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(MODES))?;
    for (name, z) in ["a", "A_L", "A_R", "B_L", "B_R"].iter().zip(v) {
        map.serialize_entry(name, &[z.re, z.im])?;
    }
    map.end()
}

impl SteadyState {
    pub fn a(&self) -> C64 {
        self.amplitudes[IDX_A]
    }
    pub fn a_l(&self) -> C64 {
        self.amplitudes[IDX_AL]
    }
    pub fn a_r(&self) -> C64 {
        self.amplitudes[IDX_AR]
    }
    pub fn b_l(&self) -> C64 {
        self.amplitudes[IDX_BL]
    }
    pub fn b_r(&self) -> C64 {
        self.amplitudes[IDX_BR]
    }
    pub fn photon_number(&self) -> f64 {
        self.a().norm_sqr()
    }
}

/// Drift matrix and source vector of the mean-field equations.
pub fn build_drift(p: &ModelParams) -> DriftSystem {
    let zero = C64::new(0.0, 0.0);
    let k = p.rate_constants();
    let (n_l, n_r) = p.species_counts();
    // e^{iφ_R} = −e^{iφ_L} exactly, so L/R cancellations are not spoiled by sin(π) ≠ 0
    let loop_l = C64::from_polar(1.0, p.phi);
    let loop_r = -loop_l;

    let mut m = [[zero; MODES]; MODES];
    let mut s = [zero; MODES];
    m[IDX_A][IDX_A] = -k.k_a;
    s[IDX_A] = C64::new(p.kappa_a.sqrt() * p.drive_amp, 0.0);

    for (a_idx, b_idx, n_q, loop_q) in [(IDX_AL, IDX_BL, n_l, loop_l), (IDX_AR, IDX_BR, n_r, loop_r)] {
        let root_n = n_q.sqrt();
        let g = -I * p.g_a * root_n;
        m[IDX_A][a_idx] = g;
        m[a_idx][IDX_A] = g;
        m[a_idx][a_idx] = -k.k_big_a;
        m[a_idx][b_idx] = -I * p.omega32_rabi * loop_q.conj();
        m[b_idx][b_idx] = -k.k_big_b;
        m[b_idx][a_idx] = -I * p.omega32_rabi * loop_q;
        s[b_idx] = -I * p.omega31_rabi * root_n;
    }
    DriftSystem { matrix: m, source: s }
}

/// Solves M·v = −s by dense Gaussian elimination.
pub fn solve_steady_linear(d: &DriftSystem) -> Result<SteadyState, SteadyError> {
    let rhs = d.source.map(|z| -z);
    let v = linalg::solve(&d.matrix, &rhs)?;
    Ok(SteadyState { amplitudes: v, residual: relative_residual(d, &v) })
}

pub fn relative_residual(d: &DriftSystem, v: &CVector<MODES>) -> f64 {
    let r = linalg::norm(&d.apply(v));
    let s = linalg::norm(&d.source);
    if s > 0.0 {
        r / s
    } else {
        r
    }
}

/// Closed-form ⟨a⟩:
///
/// ```text
///        i (N_L − N_R) g_a Ω31 Ω32 e^{−iφ} + √κ_a ε_d (K_A K_B + Ω32²)
/// ⟨a⟩ = ───────────────────────────────────────────────────────────────
///              K_a (K_A K_B + Ω32²) + g_a² N K_B
/// ```
pub fn intracavity_amplitude_closed(p: &ModelParams) -> Result<C64, SteadyError> {
    let (num_eta, num_drive, den) = closed_form_parts(p);
    if den == C64::new(0.0, 0.0) || !den.is_finite() {
        return Err(SteadyError::VanishingDenominator);
    }
    Ok((num_eta * p.eta + num_drive) / den)
}

/// ⟨a⟩ = (u·η + w) / d; returns (u, w, d).
pub(crate) fn closed_form_parts(p: &ModelParams) -> (C64, C64, C64) {
    let k = p.rate_constants();
    let o32_sq = p.omega32_rabi * p.omega32_rabi;
    let kakb = k.k_big_a * k.k_big_b + o32_sq;
    let u = I * p.n_total * p.g_a * p.omega31_rabi * p.omega32_rabi * C64::from_polar(1.0, -p.phi);
    let w = p.kappa_a.sqrt() * p.drive_amp * kakb;
    let d = k.k_a * kakb + p.g_a * p.g_a * p.n_total * k.k_big_b;
    (u, w, d)
}

/// Drive transmission T = κ_a |⟨a⟩|² / ε_d².
pub fn transmission(p: &ModelParams) -> Result<f64, SteadyError> {
    if !(p.drive_amp > 0.0) {
        return Err(SteadyError::NoDrive);
    }
    let a = intracavity_amplitude_closed(p)?;
    Ok(p.kappa_a * a.norm_sqr() / (p.drive_amp * p.drive_amp))
}

/// Sign of the η term in the optimal transmission, set by φ mod 2π.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhaseBranch {
    /// φ = 2nπ
    Plus,
    /// φ = (2n+1)π
    Minus,
}

impl PhaseBranch {
    pub fn from_phi(phi: f64) -> Result<Self, SteadyError> {
        let r = phi.rem_euclid(TAU);
        if r <= PHASE_BRANCH_TOL || TAU - r <= PHASE_BRANCH_TOL {
            Ok(PhaseBranch::Plus)
        } else if (r - PI).abs() <= PHASE_BRANCH_TOL {
            Ok(PhaseBranch::Minus)
        } else {
            Err(SteadyError::PhaseNotMultipleOfPi(phi))
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            PhaseBranch::Plus => 1.0,
            PhaseBranch::Minus => -1.0,
        }
    }
}

/// Pieces of the optimal-transmission formula
/// T_op = (κ_a/ε_d²)·((X ± Y η)/D)² with X = √κ_a ε_d Γ_B, Y = √N Ω31 Ω32,
/// D = Γ_A Γ_B + κ_a Γ_B + Ω32².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalTransmissionTerms {
    pub drive_term: f64,
    pub chiral_term: f64,
    pub denominator: f64,
    pub prefactor: f64,
    pub branch: PhaseBranch,
}

impl OptimalTransmissionTerms {
    pub fn new(p: &ModelParams) -> Result<Self, SteadyError> {
        let branch = PhaseBranch::from_phi(p.phi)?;
        if !(p.drive_amp > 0.0) {
            return Err(SteadyError::NoDrive);
        }
        Ok(OptimalTransmissionTerms {
            drive_term: p.kappa_a.sqrt() * p.drive_amp * p.gamma_b,
            chiral_term: p.n_total.sqrt() * p.omega31_rabi * p.omega32_rabi,
            denominator: p.gamma_a * p.gamma_b + p.kappa_a * p.gamma_b + p.omega32_rabi * p.omega32_rabi,
            prefactor: p.kappa_a / (p.drive_amp * p.drive_amp),
            branch,
        })
    }

    /// Bracketed amplitude (X ± Yη)/D before squaring.
    pub fn amplitude(&self, eta: f64) -> f64 {
        (self.drive_term + self.branch.sign() * self.chiral_term * eta) / self.denominator
    }

    pub fn evaluate(&self, eta: f64) -> f64 {
        let x = self.amplitude(eta);
        self.prefactor * x * x
    }
}

/// Transmission at the upper polariton peak Δa = Δ21 = g_a√N in the
/// g_a√N ≫ {κ_a, Γ_A, Γ_B, Ω32, Ω31} limit; defined only for φ = nπ.
pub fn optimal_transmission(p: &ModelParams) -> Result<f64, SteadyError> {
    Ok(OptimalTransmissionTerms::new(p)?.evaluate(p.eta))
}

/// ΔT_op = T_op(η = 1) − T_op(η = −1).
pub fn delta_t_op(p: &ModelParams) -> Result<f64, SteadyError> {
    let t = OptimalTransmissionTerms::new(p)?;
    Ok(t.evaluate(1.0) - t.evaluate(-1.0))
}

/// √κ_a ε_d Γ_B − √N Ω31 Ω32 in (rad/s)²; ≥ 0 means T_op is monotone in η.
pub fn monotonicity_margin(p: &ModelParams) -> f64 {
    p.kappa_a.sqrt() * p.drive_amp * p.gamma_b - p.n_total.sqrt() * p.omega31_rabi * p.omega32_rabi
}

/// Monotone regime test with a relative slack for parameters that sit
/// exactly on the boundary (points A and B do).
pub fn is_monotone_regime(p: &ModelParams) -> bool {
    let scale = p.kappa_a.sqrt() * p.drive_amp * p.gamma_b + p.n_total.sqrt() * p.omega31_rabi * p.omega32_rabi;
    monotonicity_margin(p) >= -1e-9 * scale
}

/// Excited-state fraction P_e = Σ_Q (|A_Q|² + |B_Q|²)/N_Q, mean-field
/// factorised; a species with N_Q = 0 contributes nothing.
pub fn excitation_fraction(s: &SteadyState, p: &ModelParams) -> f64 {
    let (n_l, n_r) = p.species_counts();
    let term = |a: C64, b: C64, n: f64| if n > 0.0 { (a.norm_sqr() + b.norm_sqr()) / n } else { 0.0 };
    term(s.a_l(), s.b_l(), n_l) + term(s.a_r(), s.b_r(), n_r)
}

/// Polariton peak positions (+g_a√N, −g_a√N).
pub fn rabi_peak_detuning(p: &ModelParams) -> (f64, f64) {
    let g = p.collective_coupling();
    (g, -g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Peak {
    Upper,
    Lower,
}

/// Full transmission with Δa = Δ21 placed on one of the polariton peaks.
pub fn peak_transmission(p: &ModelParams, peak: Peak) -> Result<f64, SteadyError> {
    let (up, low) = rabi_peak_detuning(p);
    let delta = match peak {
        Peak::Upper => up,
        Peak::Lower => low,
    };
    transmission(&p.with_cavity_locked_detuning(delta))
}

/// Whether g_a√N exceeds every other rate by at least a factor of ten.
pub fn in_strong_collective_regime(p: &ModelParams) -> bool {
    let others = [p.kappa_a, p.gamma_a, p.gamma_b, p.omega32_rabi, p.omega31_rabi];
    let fastest = others.into_iter().fold(0.0, f64::max);
    p.collective_coupling() >= 10.0 * fastest
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Warnings {
    pub high_excitation: bool,
    pub non_monotone: bool,
    pub weak_collective_coupling: bool,
}

impl Warnings {
    pub fn any(&self) -> bool {
        self.high_excitation || self.non_monotone || self.weak_collective_coupling
    }

    /// Semicolon-joined flag names, empty when no flag is set.
    pub fn labels(&self) -> String {
        let mut out = Vec::new();
        if self.high_excitation {
            out.push("high_excitation");
        }
        if self.non_monotone {
            out.push("non_monotone");
        }
        if self.weak_collective_coupling {
            out.push("weak_collective_coupling");
        }
        out.join(";")
    }
}

/// One-point evaluation: both steady-state routes plus every derived
/// observable that is defined for `p`.
#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub steady: SteadyState,
    pub closed_form_a: [f64; 2],
    pub photon_number: f64,
    pub transmission: Option<f64>,
    pub optimal_transmission: Option<f64>,
    pub delta_t_op: Option<f64>,
    pub monotonicity_margin: f64,
    pub excitation_fraction: f64,
    pub warnings: Warnings,
}

pub fn evaluate_point(p: &ModelParams) -> Result<PointReport, SteadyError> {
    let steady = solve_steady_linear(&build_drift(p))?;
    let closed = intracavity_amplitude_closed(p)?;
    let p_e = excitation_fraction(&steady, p);
    let warnings = point_warnings(p, p_e);
    Ok(PointReport {
        photon_number: steady.photon_number(),
        closed_form_a: [closed.re, closed.im],
        transmission: transmission(p).ok(),
        optimal_transmission: optimal_transmission(p).ok(),
        delta_t_op: delta_t_op(p).ok(),
        monotonicity_margin: monotonicity_margin(p),
        excitation_fraction: p_e,
        warnings,
        steady,
    })
}

pub fn point_warnings(p: &ModelParams, p_e: f64) -> Warnings {
    Warnings {
        high_excitation: p_e > EXCITATION_WARNING,
        non_monotone: !is_monotone_regime(p),
        weak_collective_coupling: !in_strong_collective_regime(p),
    }
}
