//! `enantio` command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use enantio::dynamics::max_step;
use enantio::estimation::{eta_from_top_closed, eta_from_transmission_full, eta_interval};
use enantio::harness::config::{ConfigError, EstimatorChoice, MoleculeOptions, RunConfig};
use enantio::harness::estimate::{emit_estimates_csv, estimate_batch, read_measurements_file};
use enantio::harness::figures::{all_figures, write_figures};
use enantio::harness::sweep::{params_by_key, write_sweep_files};
use enantio::harness::{
    emit_csv, emit_trajectory_csv, load_config, run_sweep, HarnessError, ParamKey, ARTIFACT, ARTIFACT_VERSION, EXIT_OK,
    EXIT_VALIDATION,
};
use enantio::{
    evaluate_point, max_sample_size, phase_mismatch, settle, to_hz, BeamGeometry, Complex64, EstimationMethod,
    FieldDetunings, ModelParams, Rk4, RotorSpec,
};

#[derive(Parser)]
#[command(name = "enantio", version, about = "Chiral-molecule cavity transmission and enantiomeric-excess estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady state and transmission observables at one parameter point (JSON).
    Steady {
        config: PathBuf,
        /// Override a model key, e.g. `--set eta=-0.5`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Two-axis parameter sweep from the config's [sweep] section (CSV).
    Sweep {
        config: PathBuf,
        /// Output CSV; a `.meta.json` sidecar is written next to it. Stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(short, long, default_value_t = default_workers())]
        workers: usize,
    },
    /// Time integration from the vacuum (trajectory CSV), or settling to the steady state (JSON).
    Dynamics {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Integrate until the state stops changing and print the settled state.
        #[arg(long)]
        settle: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Invert a measured transmission into the enantiomeric excess.
    Estimate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Single measured transmission (JSON output).
        #[arg(long, conflicts_with = "batch")]
        t_meas: Option<f64>,
        #[arg(long)]
        sigma_t: Option<f64>,
        /// CSV with columns `t_meas[,sigma_t]` (CSV output).
        #[arg(long)]
        batch: Option<PathBuf>,
        #[arg(short, long, requires = "batch")]
        out: Option<PathBuf>,
    },
    /// Transition frequencies, phase mismatch and sample-size bound (JSON).
    Molecule {
        /// Config with a [molecule] section; the built-in rotor preset when absent.
        config: Option<PathBuf>,
    },
    /// Regenerate the canned figure data sets as CSV files.
    Figures {
        #[arg(short, long, required_unless_present = "list")]
        out: Option<PathBuf>,
        /// Figure names (all when empty); `--list` prints them.
        names: Vec<String>,
        #[arg(long)]
        list: bool,
        #[arg(short, long, default_value_t = default_workers())]
        workers: usize,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK } as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Steady { config, set } => {
            let cfg = load_config(&config)?;
            let p = point(&cfg, &set)?;
            let report = evaluate_point(&p)?;
            print_json(&json!({
                "provenance": provenance(&config, &p),
                "report": report,
            }))
        }
        Command::Sweep { config, out, workers } => {
            let cfg = load_config(&config)?;
            let spec =
                cfg.sweep.ok_or_else(|| HarnessError::missing(format!("{}: no [sweep] section", config.display())))?;
            let result = run_sweep(&spec, workers)?;
            match out {
                Some(path) => write_sweep_files(&result, &path).map(|_| ()),
                None => emit_csv(&result, io::stdout().lock()).map(|_| ()),
            }
        }
        Command::Dynamics { config, set, settle: settle_only, out } => {
            let cfg = load_config(&config)?;
            let p = point(&cfg, &set)?;
            if settle_only {
                let s = settle(&p, cfg.dynamics.settle_tol)?;
                return print_json(&json!({ "provenance": provenance(&config, &p), "settled": s }));
            }
            let t_end = cfg.dynamics.t_end.ok_or_else(|| {
                HarnessError::missing(format!("{}: [dynamics] t_end_s is required", config.display()))
            })?;
            let dt = cfg.dynamics.dt.unwrap_or(0.5 * max_step(&p));
            let traj = Rk4::new(&p, dt)?.run(&[Complex64::new(0.0, 0.0); 5], t_end, cfg.dynamics.record_every)?;
            with_output(out.as_deref(), |w| emit_trajectory_csv(&traj, w).map(|_| ()))
        }
        Command::Estimate { config, set, t_meas, sigma_t, batch, out } => {
            let cfg = load_config(&config)?;
            let p = point(&cfg, &set)?;
            let mut opts = cfg.estimate;
            if let Some(path) = batch {
                let mut data = read_measurements_file(&path)?;
                if let Some(s) = sigma_t {
                    data.iter_mut().filter(|m| m.sigma_t.is_none()).for_each(|m| m.sigma_t = Some(s));
                }
                let rows = estimate_batch(&p, &opts, &data);
                return with_output(out.as_deref(), |w| emit_estimates_csv(&rows, w).map(|_| ()));
            }
            opts.t_meas = t_meas.or(opts.t_meas);
            opts.sigma_t = sigma_t.or(opts.sigma_t);
            let t = opts.t_meas.ok_or_else(|| {
                HarnessError::missing("no measurement: pass --t-meas, --batch, or set [estimate] t_meas")
            })?;
            estimate_single(&config, &p, t, opts.sigma_t, opts.method, opts.bracket)
        }
        Command::Molecule { config } => {
            let opts = match config {
                Some(path) => load_config(&path)?.molecule,
                None => None,
            }
            .unwrap_or(MoleculeOptions {
                rotor: RotorSpec::propanediol(),
                geometry: BeamGeometry::perpendicular(),
                detunings: FieldDetunings::default(),
                margin: 1.0,
            });
            let tf = opts.rotor.validate()?.transition_frequencies();
            let dk = phase_mismatch(&tf, &opts.geometry, opts.detunings)?;
            let bound = max_sample_size(dk, opts.margin)?;
            print_json(&json!({
                "artifact": ARTIFACT,
                "version": ARTIFACT_VERSION,
                "omega21_hz": to_hz(tf.omega21),
                "omega31_hz": to_hz(tf.omega31),
                "omega32_hz": to_hz(tf.omega32),
                "delta_k_rad_per_m": dk,
                "delta_k_over_2pi_per_m": to_hz(dk),
                "margin": opts.margin,
                "max_sample_size_m": bound,
                "geometry": opts.geometry,
            }))
        }
        Command::Figures { out, names, list, workers } => {
            if list {
                let mut stdout = io::stdout().lock();
                for f in all_figures() {
                    writeln!(stdout, "{}\t{}", f.name, f.description)
                        .map_err(|e| HarnessError::io(Path::new("<stdout>"), e))?;
                }
                return Ok(());
            }
            let out = out.ok_or_else(|| HarnessError::missing("--out is required"))?;
            for (name, bytes) in write_figures(&out, &names, workers)? {
                eprintln!("{name}: {bytes} bytes");
            }
            Ok(())
        }
    }
}

/// Model parameters from the config with `--set` overrides applied.
fn point(cfg: &RunConfig, set: &[String]) -> Result<ModelParams, HarnessError> {
    let overrides = set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(cfg.model.at(&overrides)?)
}

fn parse_override(s: &str) -> Result<(ParamKey, f64), ConfigError> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| ConfigError::BadValue { key: s.to_string(), message: "expected KEY=VALUE".into() })?;
    let key = key.trim();
    let k = ParamKey::from_name(key)
        .ok_or_else(|| ConfigError::BadValue { key: key.to_string(), message: "is not a model key".into() })?;
    let v = value
        .trim()
        .parse::<f64>()
        .map_err(|e| ConfigError::BadValue { key: key.to_string(), message: e.to_string() })?;
    Ok((k, v))
}

fn estimate_single(
    config: &Path,
    p: &ModelParams,
    t: f64,
    sigma_t: Option<f64>,
    choice: EstimatorChoice,
    bracket: (f64, f64),
) -> Result<(), HarnessError> {
    let methods: &[EstimationMethod] = match choice {
        EstimatorChoice::Closed => &[EstimationMethod::ClosedForm],
        EstimatorChoice::Full => &[EstimationMethod::FullModelBisection],
        EstimatorChoice::Both => &[EstimationMethod::ClosedForm, EstimationMethod::FullModelBisection],
    };
    let mut entries = Vec::new();
    let mut first_error = None;
    let mut any_ok = false;
    for &method in methods {
        let raw = match method {
            EstimationMethod::ClosedForm => eta_from_top_closed(t, p),
            EstimationMethod::FullModelBisection => eta_from_transmission_full(t, p, bracket),
        };
        entries.push(match &raw {
            Ok(est) => {
                any_ok = true;
                let interval = sigma_t.map(|s| eta_interval(est, s, p)).transpose()?;
                json!({ "method": method.label(), "estimate": est, "interval": interval })
            }
            Err(e) => json!({ "method": method.label(), "error": e.to_string() }),
        });
        if let Err(e) = raw {
            first_error.get_or_insert(e);
        }
    }
    print_json(&json!({
        "provenance": provenance(config, p),
        "t_meas": t,
        "sigma_t": sigma_t,
        "estimates": entries,
    }))?;
    match first_error {
        Some(e) if !any_ok => Err(e.into()),
        _ => Ok(()),
    }
}

fn provenance(config: &Path, p: &ModelParams) -> Value {
    json!({
        "artifact": ARTIFACT,
        "version": ARTIFACT_VERSION,
        "config": config.display().to_string(),
        "params": params_by_key(p),
    })
}

fn print_json(v: &Value) -> Result<(), HarnessError> {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, v)?;
    writeln!(stdout).map_err(|e| HarnessError::io(Path::new("<stdout>"), e))
}

fn with_output(
    path: Option<&Path>,
    emit: impl FnOnce(&mut dyn Write) -> Result<(), HarnessError>,
) -> Result<(), HarnessError> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
            let mut w = BufWriter::new(file);
            emit(&mut w)?;
            w.flush().map_err(|e| HarnessError::io(path, e))
        }
        None => emit(&mut io::stdout().lock()),
    }
}
