//! Two-axis parameter sweeps and their CSV output.

use std::f64::consts::TAU;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::params::ModelParams;
use crate::steady::{
    build_drift, delta_t_op, excitation_fraction, monotonicity_margin, optimal_transmission, point_warnings,
    solve_steady_linear, transmission, SteadyError, Warnings,
};

use super::config::{ConfigError, ModelSetup, ParamKey};
use super::{HarnessError, ARTIFACT, ARTIFACT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    PhotonNumber,
    Transmission,
    TOp,
    DeltaTOp,
    PE,
    MonotonicityMargin,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::PhotonNumber,
        Observable::Transmission,
        Observable::TOp,
        Observable::DeltaTOp,
        Observable::PE,
        Observable::MonotonicityMargin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::PhotonNumber => "photon_number",
            Observable::Transmission => "transmission",
            Observable::TOp => "t_op",
            Observable::DeltaTOp => "delta_t_op",
            Observable::PE => "p_e",
            Observable::MonotonicityMargin => "monotonicity_margin",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == name)
    }

    /// CSV column name; carries a unit suffix when the value is dimensional.
    pub fn column(self) -> &'static str {
        match self {
            Observable::MonotonicityMargin => "monotonicity_margin_hz2",
            other => other.name(),
        }
    }

    /// Evaluates the observable at `p`. The margin is returned in Hz²,
    /// i.e. divided by (2π)².
    pub fn evaluate(self, p: &ModelParams) -> Result<(f64, Warnings), SteadyError> {
        let steady = solve_steady_linear(&build_drift(p));
        let p_e = steady.as_ref().map_or(0.0, |s| excitation_fraction(s, p));
        let warnings = point_warnings(p, p_e);
        let value = match self {
            Observable::PhotonNumber => steady?.photon_number(),
            Observable::Transmission => transmission(p)?,
            Observable::TOp => optimal_transmission(p)?,
            Observable::DeltaTOp => delta_t_op(p)?,
            Observable::PE => {
                steady?;
                p_e
            }
            Observable::MonotonicityMargin => monotonicity_margin(p) / (TAU * TAU),
        };
        Ok((value, warnings))
    }
}

/// One sweep axis in configuration units; values include both end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub key: ParamKey,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(key: ParamKey, start: f64, stop: f64, points: usize) -> Result<Self, String> {
        if points < 2 {
            return Err(format!("points must be at least 2 (got {points})"));
        }
        if !(start.is_finite() && stop.is_finite()) {
            return Err(format!("range must be finite (got {start} .. {stop})"));
        }
        Ok(Axis { key, start, stop, points })
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.stop
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.points - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub setup: ModelSetup,
    pub axis1: Axis,
    pub axis2: Axis,
    pub observable: Observable,
}

impl SweepSpec {
    pub fn new(setup: ModelSetup, axis1: Axis, axis2: Axis, observable: Observable) -> Result<Self, ConfigError> {
        if axis1.key == axis2.key {
            return Err(ConfigError::BadValue {
                key: "axis2.key".into(),
                message: format!("both axes sweep `{}`", axis1.key),
            });
        }
        for axis in [axis1, axis2] {
            let pinned = match axis.key {
                ParamKey::Delta21 => setup.peak.is_some(),
                ParamKey::DeltaA => setup.cavity_follows_delta_21,
                _ => false,
            };
            if pinned {
                return Err(ConfigError::BadValue {
                    key: axis.key.name().into(),
                    message: "is derived from other parameters in this setup and cannot be swept".into(),
                });
            }
        }
        Ok(SweepSpec { setup, axis1, axis2, observable })
    }

    pub fn len(&self) -> usize {
        self.axis1.points * self.axis2.points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid indices of the flat, axis1-major position `k`.
    pub fn indices(&self, k: usize) -> (usize, usize) {
        (k / self.axis2.points, k % self.axis2.points)
    }

    pub fn params_at(&self, i1: usize, i2: usize) -> Result<ModelParams, HarnessError> {
        let coords = [(self.axis1.key, self.axis1.value(i1)), (self.axis2.key, self.axis2.value(i2))];
        self.setup.at(&coords).map_err(|source| HarnessError::GridPoint {
            coords: format!("{}={}, {}={}", coords[0].0, coords[0].1, coords[1].0, coords[1].1),
            source,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PointStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub i1: usize,
    pub i2: usize,
    pub params: ModelParams,
    /// NaN when `status` is `Failed`.
    pub value: f64,
    pub status: PointStatus,
    pub warnings: Warnings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Point with the largest finite value.
    pub fn argmax(&self) -> Option<&SweepPoint> {
        self.points.iter().filter(|p| p.value.is_finite()).fold(None, |best: Option<&SweepPoint>, p| match best {
            Some(b) if b.value >= p.value => Some(b),
            _ => Some(p),
        })
    }

    pub fn get(&self, i1: usize, i2: usize) -> &SweepPoint {
        &self.points[i1 * self.spec.axis2.points + i2]
    }
}

/// Evaluates every grid point on a pool of `workers` threads. Results are
/// assembled by grid index, so the output does not depend on `workers`.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult, HarnessError> {
    let params = (0..spec.len())
        .map(|k| {
            let (i1, i2) = spec.indices(k);
            spec.params_at(i1, i2)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let points = pool.install(|| {
        params
            .par_iter()
            .enumerate()
            .map(|(k, p)| {
                let (i1, i2) = spec.indices(k);
                let (value, status, warnings) = match spec.observable.evaluate(p) {
                    Ok((v, w)) if v.is_finite() => (v, PointStatus::Ok, w),
                    Ok((v, w)) => (f64::NAN, PointStatus::Failed(format!("non-finite value {v}")), w),
                    Err(e) => (f64::NAN, PointStatus::Failed(e.to_string()), point_warnings(p, 0.0)),
                };
                SweepPoint { i1, i2, params: *p, value, status, warnings }
            })
            .collect()
    });
    Ok(SweepResult { spec: *spec, points })
}

/// `{:.16e}` gives 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column order: the two axis keys, the remaining parameter keys, the
/// observable, `status`, `warnings`.
pub fn csv_columns(spec: &SweepSpec) -> Vec<&'static str> {
    let mut cols = vec![spec.axis1.key.name(), spec.axis2.key.name()];
    cols.extend(ParamKey::ALL.into_iter().filter(|&k| k != spec.axis1.key && k != spec.axis2.key).map(ParamKey::name));
    cols.extend([spec.observable.column(), "status", "warnings"]);
    cols
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Writes the header plus one row per grid point and returns the byte count.
pub fn emit_csv<W: Write>(r: &SweepResult, w: W) -> Result<u64, HarnessError> {
    let mut buf = Vec::new();
    {
        let mut out = csv_writer(&mut buf);
        let cols = csv_columns(&r.spec);
        out.write_record(&cols)?;
        let keys: Vec<ParamKey> = cols.iter().filter_map(|c| ParamKey::from_name(c)).collect();
        for pt in &r.points {
            let mut row: Vec<String> = keys.iter().map(|k| format_float(k.get(&pt.params))).collect();
            row.push(format_float(pt.value));
            row.push(match &pt.status {
                PointStatus::Ok => "ok".to_string(),
                PointStatus::Failed(reason) => format!("failed: {reason}"),
            });
            row.push(pt.warnings.labels());
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| HarnessError::io(Path::new("<csv>"), e))?;
    }
    let mut w = w;
    w.write_all(&buf).map_err(|e| HarnessError::io(Path::new("<csv>"), e))?;
    Ok(buf.len() as u64)
}

#[derive(Debug, Serialize)]
struct SweepMeta<'a> {
    artifact: &'a str,
    version: &'a str,
    observable: &'a str,
    columns: Vec<&'a str>,
    rows: usize,
    axis1: Axis,
    axis2: Axis,
    base: std::collections::BTreeMap<&'static str, f64>,
    cavity_follows_delta_21: bool,
    peak: Option<crate::steady::Peak>,
    failed_points: usize,
}

/// Parameters keyed by configuration name, in configuration units.
pub fn params_by_key(p: &ModelParams) -> std::collections::BTreeMap<&'static str, f64> {
    ParamKey::ALL.into_iter().map(|k| (k.name(), k.get(p))).collect()
}

pub fn meta_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn emit_meta<W: Write>(r: &SweepResult, w: W) -> Result<(), HarnessError> {
    let meta = SweepMeta {
        artifact: ARTIFACT,
        version: ARTIFACT_VERSION,
        observable: r.spec.observable.name(),
        columns: csv_columns(&r.spec),
        rows: r.points.len(),
        axis1: r.spec.axis1,
        axis2: r.spec.axis2,
        base: params_by_key(&r.spec.setup.base),
        cavity_follows_delta_21: r.spec.setup.cavity_follows_delta_21,
        peak: r.spec.setup.peak,
        failed_points: r.points.iter().filter(|p| p.status != PointStatus::Ok).count(),
    };
    serde_json::to_writer_pretty(w, &meta)?;
    Ok(())
}

/// Writes `path` and its `.meta.json` sidecar; returns the CSV byte count.
pub fn write_sweep_files(r: &SweepResult, path: &Path) -> Result<u64, HarnessError> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let bytes = emit_csv(r, std::io::BufWriter::new(file))?;
    let meta = meta_path(path);
    let file = std::fs::File::create(&meta).map_err(|e| HarnessError::io(&meta, e))?;
    emit_meta(r, std::io::BufWriter::new(file))?;
    Ok(bytes)
}
