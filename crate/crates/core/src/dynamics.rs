//! Time integration of the mean-field equations dv/dt = M·v + s.
//!
//! Classical fixed-step RK4. The step is bounded by the fastest rate in the
//! model, so trajectories are reproducible bit for bit for a given `dt`.

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, CVector};
use crate::params::ModelParams;
use crate::steady::{build_drift, relative_residual, DriftSystem, SteadyState, MODES};

pub type ModeVector = CVector<MODES>;

/// dt · (fastest rate) must not exceed this.
pub const STEP_GUARD: f64 = 0.1;
/// Default settling cap, in units of the slowest bare damping time.
pub const DEFAULT_MAX_DAMPING_TIMES: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("step {dt:e} s exceeds the stability guard {limit:e} s (0.1 / fastest rate)")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("invalid time span: t_end = {t_end}, dt = {dt}")]
    BadSpan { t_end: f64, dt: f64 },
    #[error("state became non-finite at t = {t:e} s")]
    NonFinite { t: f64 },
    #[error("no convergence within {elapsed:e} s ({damping_times} damping times); last relative rate {rate:e}")]
    NotConverged { elapsed: f64, damping_times: f64, rate: f64 },
    #[error("record_every must be at least 1")]
    BadStride,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    pub t: f64,
    pub v: ModeVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<MeanFieldState>,
    pub dt: f64,
    pub method: &'static str,
    /// ‖M·v + s‖/‖s‖ at the last state.
    pub final_residual: f64,
}

impl Trajectory {
    pub fn last(&self) -> &MeanFieldState {
        self.states.last().expect("trajectory always holds the initial state")
    }
}

/// dv/dt for the model `p`.
pub fn derivative(v: &ModeVector, p: &ModelParams) -> ModeVector {
    build_drift(p).apply(v)
}

/// Fastest rate among |K_a|, |K_A|, |K_B|, g_a√N, Ω32, Ω31√N.
pub fn fastest_rate(p: &ModelParams) -> f64 {
    let k = p.rate_constants();
    [
        k.k_a.norm(),
        k.k_big_a.norm(),
        k.k_big_b.norm(),
        p.collective_coupling(),
        p.omega32_rabi,
        p.omega31_rabi * p.n_total.max(0.0).sqrt(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Largest admissible step for `p`.
pub fn max_step(p: &ModelParams) -> f64 {
    STEP_GUARD / fastest_rate(p)
}

fn axpy(v: &ModeVector, h: f64, k: &ModeVector) -> ModeVector {
    std::array::from_fn(|i| v[i] + k[i] * h)
}

/// Fixed-step RK4 on a drift system.
#[derive(Debug, Clone)]
pub struct Rk4 {
    system: DriftSystem,
    dt: f64,
}

impl Rk4 {
    /// Integrator for `p`; `dt` is checked against [`max_step`].
    pub fn new(p: &ModelParams, dt: f64) -> Result<Self, DynamicsError> {
        Self::for_system(build_drift(p), dt, fastest_rate(p))
    }

    /// Integrator for an arbitrary drift system with an explicit rate bound.
    pub fn for_system(system: DriftSystem, dt: f64, rate_bound: f64) -> Result<Self, DynamicsError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(DynamicsError::BadSpan { t_end: f64::NAN, dt });
        }
        let limit = STEP_GUARD / rate_bound.max(system.max_rate());
        if dt > limit {
            return Err(DynamicsError::StepTooLarge { dt, limit });
        }
        Ok(Rk4 { system, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn system(&self) -> &DriftSystem {
        &self.system
    }

    pub fn step_with(&self, v: &ModeVector, h: f64) -> ModeVector {
        let f = |x: &ModeVector| self.system.apply(x);
        let k1 = f(v);
        let k2 = f(&axpy(v, 0.5 * h, &k1));
        let k3 = f(&axpy(v, 0.5 * h, &k2));
        let k4 = f(&axpy(v, h, &k3));
        std::array::from_fn(|i| v[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
    }

    pub fn step(&self, v: &ModeVector) -> ModeVector {
        self.step_with(v, self.dt)
    }

    /// Integrates to `t_end` on a uniform grid whose spacing is the largest
    /// value ≤ dt that divides `t_end`, calling `observe` after every step.
    pub fn run_observed(
        &self,
        v0: &ModeVector,
        t_end: f64,
        mut observe: impl FnMut(usize, f64, &ModeVector),
    ) -> Result<(ModeVector, f64), DynamicsError> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(DynamicsError::BadSpan { t_end, dt: self.dt });
        }
        let n = (t_end / self.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = t_end / n as f64;
        let mut v = *v0;
        for i in 1..=n {
            v = self.step_with(&v, h);
            let t = i as f64 * h;
            if v.iter().any(|z| !z.is_finite()) {
                return Err(DynamicsError::NonFinite { t });
            }
            observe(i, t, &v);
        }
        Ok((v, h))
    }

    /// Integrates to `t_end`, keeping every `record_every`-th state (the
    /// initial and final states are always kept).
    pub fn run(&self, v0: &ModeVector, t_end: f64, record_every: usize) -> Result<Trajectory, DynamicsError> {
        if record_every == 0 {
            return Err(DynamicsError::BadStride);
        }
        let mut states = vec![MeanFieldState { t: 0.0, v: *v0 }];
        let mut last = (0, 0.0);
        let (v, h) = self.run_observed(v0, t_end, |i, t, v| {
            if i % record_every == 0 {
                states.push(MeanFieldState { t, v: *v });
            }
            last = (i, t);
        })?;
        if last.0 % record_every != 0 {
            states.push(MeanFieldState { t: last.1, v });
        }
        Ok(Trajectory { states, dt: h, method: "rk4", final_residual: relative_residual(&self.system, &v) })
    }
}

/// Integrates from `v0` to `t_end`, recording every step.
pub fn integrate(p: &ModelParams, v0: &ModeVector, t_end: f64, dt: f64) -> Result<Trajectory, DynamicsError> {
    Rk4::new(p, dt)?.run(v0, t_end, 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettleOptions {
    /// Stop when ‖dv/dt‖ ≤ tol · (slowest damping rate) · ‖v‖.
    pub tol: f64,
    /// Step size; `None` picks half the stability limit.
    pub dt: Option<f64>,
    pub max_damping_times: f64,
    pub initial: Option<ModeVector>,
}

impl SettleOptions {
    pub fn with_tol(tol: f64) -> Self {
        SettleOptions { tol, dt: None, max_damping_times: DEFAULT_MAX_DAMPING_TIMES, initial: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settled {
    pub state: SteadyState,
    pub settle_time: f64,
    pub steps: usize,
    pub dt: f64,
}

/// Integrates `p` from the vacuum until the relative rate of change drops
/// below `tol`.
pub fn settle(p: &ModelParams, tol: f64) -> Result<Settled, DynamicsError> {
    settle_system(&build_drift(p), fastest_rate(p), SettleOptions::with_tol(tol))
}

pub fn settle_system(d: &DriftSystem, rate_bound: f64, opts: SettleOptions) -> Result<Settled, DynamicsError> {
    let rate_bound = rate_bound.max(d.max_rate());
    let dt = opts.dt.unwrap_or(0.5 * STEP_GUARD / rate_bound);
    let rk = Rk4::for_system(*d, dt, rate_bound)?;
    let slow = d.min_damping();
    let cap = opts.max_damping_times / slow;
    // check the stopping rule roughly every 1% of a damping time
    let check_every = ((0.01 / (slow * dt)).floor() as usize).max(1);

    let mut v = opts.initial.unwrap_or([C64::new(0.0, 0.0); MODES]);
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut rate = f64::INFINITY;
    loop {
        let dv = d.apply(&v);
        let vn = linalg::norm(&v);
        let dvn = linalg::norm(&dv);
        rate = if vn > 0.0 {
            dvn / (slow * vn)
        } else if dvn == 0.0 {
            0.0
        } else {
            rate
        };
        if dvn == 0.0 || (vn > 0.0 && rate <= opts.tol) {
            return Ok(Settled {
                state: SteadyState { amplitudes: v, residual: relative_residual(d, &v) },
                settle_time: t,
                steps,
                dt,
            });
        }
        if t >= cap {
            return Err(DynamicsError::NotConverged { elapsed: t, damping_times: t * slow, rate });
        }
        for _ in 0..check_every {
            v = rk.step(&v);
        }
        steps += check_every;
        t = steps as f64 * dt;
        if v.iter().any(|z| !z.is_finite()) {
            return Err(DynamicsError::NotConverged { elapsed: t, damping_times: t * slow, rate: f64::INFINITY });
        }
    }
}
