//! Configuration, sweeps, file output and the error-to-exit-code mapping
//! shared by the command-line front end.

pub mod config;
pub mod estimate;
pub mod figures;
pub mod sweep;

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dynamics::{DynamicsError, Trajectory};
use crate::estimation::EstimationError;
use crate::linalg::LinalgError;
use crate::params::ParamError;
use crate::spectroscopy::SpectroscopyError;
use crate::steady::SteadyError;

pub use config::{load_config, parse_config, ConfigError, ModelSetup, ParamKey, RunConfig};
pub use sweep::{emit_csv, run_sweep, Axis, Observable, SweepResult, SweepSpec};

pub const ARTIFACT: &str = "enantio";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Steady(#[from] SteadyError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Spectroscopy(#[from] SpectroscopyError),
    #[error("invalid grid point ({coords}): {source}")]
    GridPoint { coords: String, source: ConfigError },
    #[error("{context}")]
    Missing { context: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    pub fn missing(context: impl Into<String>) -> Self {
        HarnessError::Missing { context: context.into() }
    }

    /// 1 for invalid input, 2 for numerical failure, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_)
            | HarnessError::Param(_)
            | HarnessError::Spectroscopy(_)
            | HarnessError::GridPoint { .. }
            | HarnessError::Missing { .. } => EXIT_VALIDATION,
            HarnessError::Steady(e) => steady_code(e),
            HarnessError::Dynamics(e) => match e {
                DynamicsError::NonFinite { .. } | DynamicsError::NotConverged { .. } => EXIT_NUMERICAL,
                _ => EXIT_VALIDATION,
            },
            HarnessError::Estimation(e) => match e {
                EstimationError::Steady(s) => steady_code(s),
                EstimationError::Ambiguous { .. } => EXIT_NUMERICAL,
                _ => EXIT_VALIDATION,
            },
            HarnessError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(_) => EXIT_IO,
                _ => EXIT_VALIDATION,
            },
            HarnessError::Io { .. } | HarnessError::Json(_) => EXIT_IO,
            HarnessError::Pool(_) => EXIT_NUMERICAL,
        }
    }
}

fn steady_code(e: &SteadyError) -> i32 {
    match e {
        SteadyError::Linalg(LinalgError::Singular { .. } | LinalgError::IllConditioned { .. })
        | SteadyError::Linalg(LinalgError::NoConvergence)
        | SteadyError::VanishingDenominator => EXIT_NUMERICAL,
        SteadyError::NoDrive | SteadyError::PhaseNotMultipleOfPi(_) => EXIT_VALIDATION,
    }
}

pub const TRAJECTORY_COLUMNS: [&str; 11] =
    ["t_s", "a_re", "a_im", "A_L_re", "A_L_im", "A_R_re", "A_R_im", "B_L_re", "B_L_im", "B_R_re", "B_R_im"];

/// Trajectory as CSV: time in seconds, then real/imaginary parts of
/// a, A_L, A_R, B_L, B_R. Returns the byte count.
pub fn emit_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<u64, HarnessError> {
    let mut buf = Vec::new();
    {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
        out.write_record(TRAJECTORY_COLUMNS)?;
        for s in &traj.states {
            let mut row = vec![sweep::format_float(s.t)];
            for z in s.v {
                row.push(sweep::format_float(z.re));
                row.push(sweep::format_float(z.im));
            }
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| HarnessError::io(Path::new("<csv>"), e))?;
    }
    w.write_all(&buf).map_err(|e| HarnessError::io(Path::new("<csv>"), e))?;
    Ok(buf.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrate;
    use crate::params::ModelParams;

    #[test]
    fn exit_codes() {
        let validation: HarnessError = ConfigError::UnknownPreset("x".into()).into();
        assert_eq!(validation.exit_code(), EXIT_VALIDATION);
        let singular: HarnessError = SteadyError::Linalg(LinalgError::Singular { condition: 1e20 }).into();
        assert_eq!(singular.exit_code(), EXIT_NUMERICAL);
        let io = HarnessError::io(Path::new("/nope"), std::io::Error::from(std::io::ErrorKind::NotFound));
        assert_eq!(io.exit_code(), EXIT_IO);
        let ambiguous: HarnessError = EstimationError::Ambiguous { candidates: vec![0.1, 0.2] }.into();
        assert_eq!(ambiguous.exit_code(), EXIT_NUMERICAL);
        let phase: HarnessError = EstimationError::Steady(SteadyError::PhaseNotMultipleOfPi(1.0)).into();
        assert_eq!(phase.exit_code(), EXIT_VALIDATION);
    }

    #[test]
    fn trajectory_csv_layout() {
        let p = ModelParams::point_b();
        let traj = integrate(&p, &[num_complex::Complex64::new(0.0, 0.0); 5], 1e-9, 1e-10).unwrap();
        let mut out = Vec::new();
        let bytes = emit_trajectory_csv(&traj, &mut out).unwrap();
        assert_eq!(bytes as usize, out.len());
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_COLUMNS.join(","));
        assert_eq!(lines.len(), traj.states.len() + 1);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 11));
    }
}
