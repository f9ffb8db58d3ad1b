//! Single and batch η inversion for the `estimate` command.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::estimation::{
    eta_from_top_closed, eta_from_transmission_full, eta_interval, EstimationError, EstimationMethod,
};
use crate::params::ModelParams;

use super::config::{EstimateOptions, EstimatorChoice};
use super::sweep::format_float;
use super::HarnessError;

/// One row of batch input: `t_meas` and an optional `sigma_t` column.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
pub struct Measurement {
    pub t_meas: f64,
    #[serde(default)]
    pub sigma_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub t_meas: f64,
    pub sigma_t: Option<f64>,
    pub method: EstimationMethod,
    /// `Ok` estimate or the error message.
    pub result: Result<crate::estimation::EtaEstimate, String>,
    pub interval: Option<(f64, f64)>,
    /// Crossing candidates when the full model is ambiguous.
    pub candidates: Vec<f64>,
}

pub fn read_measurements<R: Read>(r: R) -> Result<Vec<Measurement>, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    rdr.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

pub fn read_measurements_file(path: &Path) -> Result<Vec<Measurement>, HarnessError> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_measurements(file)
}

fn methods(choice: EstimatorChoice) -> &'static [EstimationMethod] {
    match choice {
        EstimatorChoice::Closed => &[EstimationMethod::ClosedForm],
        EstimatorChoice::Full => &[EstimationMethod::FullModelBisection],
        EstimatorChoice::Both => &[EstimationMethod::ClosedForm, EstimationMethod::FullModelBisection],
    }
}

pub fn estimate_one(p: &ModelParams, m: Measurement, method: EstimationMethod, bracket: (f64, f64)) -> EstimateRow {
    let raw = match method {
        EstimationMethod::ClosedForm => eta_from_top_closed(m.t_meas, p),
        EstimationMethod::FullModelBisection => eta_from_transmission_full(m.t_meas, p, bracket),
    };
    let candidates = match &raw {
        Err(EstimationError::Ambiguous { candidates }) => candidates.clone(),
        _ => Vec::new(),
    };
    let interval = match (&raw, m.sigma_t) {
        (Ok(est), Some(sigma)) => eta_interval(est, sigma, p).ok(),
        _ => None,
    };
    EstimateRow {
        t_meas: m.t_meas,
        sigma_t: m.sigma_t,
        method,
        result: raw.map_err(|e| e.to_string()),
        interval,
        candidates,
    }
}

/// Every measurement through every selected estimator, in input order.
pub fn estimate_batch(p: &ModelParams, opts: &EstimateOptions, data: &[Measurement]) -> Vec<EstimateRow> {
    data.iter()
        .flat_map(|&m| methods(opts.method).iter().map(move |&method| (m, method)))
        .map(|(m, method)| estimate_one(p, m, method, opts.bracket))
        .collect()
}

pub const ESTIMATE_COLUMNS: [&str; 12] = [
    "t_meas",
    "sigma_t",
    "method",
    "eta_hat",
    "eta_clamped",
    "in_range",
    "monotone_regime",
    "residual",
    "eta_lo",
    "eta_hi",
    "candidates",
    "status",
];

pub fn emit_estimates_csv<W: Write>(rows: &[EstimateRow], mut w: W) -> Result<u64, HarnessError> {
    let mut buf = Vec::new();
    {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
        out.write_record(ESTIMATE_COLUMNS)?;
        let opt = |x: Option<f64>| x.map_or_else(String::new, format_float);
        for r in rows {
            let (lo, hi) = r.interval.map_or((None, None), |(a, b)| (Some(a), Some(b)));
            let candidates = r.candidates.iter().map(|&c| format_float(c)).collect::<Vec<_>>().join(";");
            let mut row = vec![format_float(r.t_meas), opt(r.sigma_t), r.method.label().to_string()];
            match &r.result {
                Ok(e) => row.extend([
                    format_float(e.eta_hat),
                    format_float(e.eta_clamped),
                    e.in_range.to_string(),
                    e.monotone_regime.to_string(),
                    format_float(e.residual),
                ]),
                Err(_) => row.extend(["NaN", "NaN", "", "", "NaN"].map(String::from)),
            }
            row.extend([opt(lo), opt(hi), candidates]);
            row.push(match &r.result {
                Ok(_) => "ok".to_string(),
                Err(msg) => format!("failed: {msg}"),
            });
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
    use crate::params::{drive_from_flux_hz, hz};
    use crate::steady::transmission;

    #[test]
    fn reads_rows_with_and_without_uncertainty() {
        let data = read_measurements("t_meas,sigma_t\n1.5,0.01\n2.0,\n".as_bytes()).unwrap();
        assert_eq!(
            data,
            vec![Measurement { t_meas: 1.5, sigma_t: Some(0.01) }, Measurement { t_meas: 2.0, sigma_t: None },]
        );
        let data = read_measurements("t_meas\n0.25\n".as_bytes()).unwrap();
        assert_eq!(data[0].sigma_t, None);
        assert!(read_measurements("t_meas\nabc\n".as_bytes()).is_err());
    }

    #[test]
    fn batch_runs_both_estimators_in_order() {
        let p = ModelParams::point_b();
        let t = transmission(&p.with_eta(0.4)).unwrap();
        let data = [Measurement { t_meas: t, sigma_t: Some(0.01) }, Measurement { t_meas: 100.0, sigma_t: None }];
        let rows = estimate_batch(&p, &EstimateOptions::default(), &data);
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].method, EstimationMethod::FullModelBisection);
        let full = rows[1].result.as_ref().unwrap();
        assert!((full.eta_hat - 0.4).abs() < 1e-9);
        assert!(rows[1].interval.is_some());
        assert!(rows[2].result.is_err() && rows[3].result.is_err());
        let mut out = Vec::new();
        emit_estimates_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.matches("failed: ").count(), 2);
    }

    #[test]
    fn ambiguous_candidates_are_kept() {
        let p = ModelParams { omega32_rabi: hz(100e3), drive_amp: drive_from_flux_hz(50e6), ..ModelParams::point_a() };
        let t = transmission(&p.with_eta(0.0)).unwrap();
        let row = estimate_one(
            &p,
            Measurement { t_meas: t, sigma_t: None },
            EstimationMethod::FullModelBisection,
            (-1.0, 1.0),
        );
        assert!(row.result.is_err());
        assert_eq!(row.candidates.len(), 2, "{:?}", row);
    }
}
