//! Cavity-QED detection of enantiomeric excess.
//!
//! A chiral mixture of cyclic three-level molecules sits in a driven ring
//! cavity. The loop phase differs by π between the two enantiomers, so the
//! cavity transmission depends on the enantiomeric excess η. This crate
//! computes the mean-field steady state and dynamics of the five coupled
//! modes, the transmission observables, the molecular transition
//! frequencies and phase mismatch, and inverts a measured transmission
//! back into η.
//!
//! All frequencies inside the crate are angular (rad/s). The configuration
//! layer in [`harness`] reads ν in Hz and converts once.

pub mod dynamics;
pub mod estimation;
pub mod harness;
pub mod linalg;
pub mod params;
pub mod spectroscopy;
pub mod steady;

pub use num_complex::Complex64;

pub use dynamics::{integrate, settle, DynamicsError, MeanFieldState, Rk4, SettleOptions, Settled, Trajectory};
pub use estimation::{
    eta_from_top_closed, eta_from_transmission_full, eta_interval, sensitivity, EstimationError, EstimationMethod,
    EtaEstimate,
};
pub use harness::HarnessError;
pub use params::{drive_from_flux_hz, hz, to_hz, ModelParams, ParamError, RateConstants};
pub use spectroscopy::{
    max_sample_size, phase_mismatch, BeamGeometry, FieldDetunings, RotorSpec, SpectroscopyError, TransitionFrequencies,
};
pub use steady::{
    build_drift, delta_t_op, evaluate_point, excitation_fraction, intracavity_amplitude_closed, monotonicity_margin,
    optimal_transmission, solve_steady_linear, transmission, DriftSystem, Peak, PointReport, SteadyError, SteadyState,
    Warnings,
};
