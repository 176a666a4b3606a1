use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use qoct_core::bench::{
    dispersion_sensitivity_sweep, precision_report, run_trials, scan_plan_sweep, write_histogram_csv,
    write_sweep_csv, write_trials_csv, BenchError, Histogram,
};
use qoct_core::estimator::{estimate_delta_tau, EstimatorError, Mode};
use qoct_core::scan::{RecordError, ScanRecord};

use crate::config::{ConfigError, LoadedConfig, TuningOverrides};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Record { path: PathBuf, source: RecordError },
    #[error("{0}")]
    Bench(#[from] BenchError),
    #[error("estimation failed at stage {stage}: {0}", stage = .0.stage())]
    Estimate(EstimatorError),
    #[error("{failed} of {trials} trials failed, more than the allowed fraction {allowed}")]
    TooManyFailures { failed: usize, trials: usize, allowed: f64 },
}

impl CliError {
    /// 2 for unusable input or output, 3 when the data could not be analysed.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Record { .. } => 2,
            CliError::Bench(BenchError::Io(_)) => 2,
            CliError::Bench(BenchError::Estimator(_)) => 3,
            CliError::Bench(_) => 2,
            CliError::Estimate(_) | CliError::TooManyFailures { .. } => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(io_err(path))
}

/// Creates the output directory and writes the effective configuration
/// into it, so that the run can be repeated from that file alone.
fn prepare_output(cfg: &LoadedConfig, out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut snapshot = cfg.config.clone();
    snapshot.output_dir = out.to_path_buf();
    let path = out.join("config.toml");
    fs::write(&path, snapshot.to_toml()).map_err(io_err(&path))
}

pub fn simulate(cfg: &LoadedConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let prepared = cfg.experiment()?.prepare()?;
    let records = prepared.simulate(cfg.config.root_seed)?;
    if records.dip_outside_window {
        eprintln!("warning: a core's interferogram center lies outside its scan window");
    }
    prepare_output(cfg, out)?;
    let mut written = Vec::new();
    for (core, pair) in [("core1", &records.core1), ("core2", &records.core2)] {
        for record in [&pair.singles, &pair.coincidences] {
            let path = out.join(format!("{core}_{}.csv", record.channel));
            let mut w = create(&path)?;
            record.write_csv(&mut w).map_err(|source| CliError::Record {
                path: path.clone(),
                source,
            })?;
            finish(w, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn load_record(path: &Path) -> Result<ScanRecord, CliError> {
    ScanRecord::load(path).map_err(|source| CliError::Record {
        path: path.to_path_buf(),
        source,
    })
}

pub fn estimate(
    cfg: &LoadedConfig,
    record1: &Path,
    record2: &Path,
    mode: Mode,
    flags: &TuningOverrides,
) -> Result<String, CliError> {
    let spectrum = cfg.experiment()?.quantum.spectrum;
    let tuning = flags.apply(cfg.tuning(mode, &spectrum)?, &spectrum);
    let r1 = load_record(record1)?;
    let r2 = load_record(record2)?;
    let estimate = estimate_delta_tau(&r1, &r2, &tuning).map_err(CliError::Estimate)?;
    Ok(serde_json::to_string_pretty(&estimate.to_json()).expect("estimate serializes"))
}

pub fn bench(cfg: &LoadedConfig, out: &Path) -> Result<String, CliError> {
    let c = &cfg.config;
    let prepared = cfg.experiment()?.prepare()?;
    let set = run_trials(&prepared, c.bench.trials, c.root_seed)?;
    let report = precision_report(&set, c.bench.histogram_bins)?;
    prepare_output(cfg, out)?;

    let path = out.join("report.json");
    let json = serde_json::to_string_pretty(&report).map_err(|e| BenchError::Serialize(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(io_err(&path))?;

    let path = out.join("trials.csv");
    let mut w = create(&path)?;
    write_trials_csv(&set, &mut w)?;
    finish(w, &path)?;

    for mode in [Mode::Quantum, Mode::Classical] {
        let path = out.join(format!("histogram_{mode}.csv"));
        let empty = Histogram {
            edges: Vec::new(),
            counts: Vec::new(),
        };
        let hist = report.mode(mode).map_or(&empty, |m| &m.histogram);
        let mut w = create(&path)?;
        write_histogram_csv(hist, &mut w)?;
        finish(w, &path)?;
    }

    let mut summary = String::new();
    for mode in [Mode::Quantum, Mode::Classical] {
        match report.mode(mode) {
            Some(m) => summary += &format!(
                "{mode:<9} Δτ = {:.4} ± {:.4} µm  Δn std {:.3e}  ({} ok, {} failed)\n",
                m.mean_delta_tau_m * 1e6,
                m.std_delta_tau_m * 1e6,
                m.std_delta_n,
                m.successes,
                m.failures
            ),
            None => summary += &format!("{mode:<9} every trial failed\n"),
        }
    }
    if let Some(r) = report.ratio {
        summary += &format!("σ_classical/σ_quantum = {r:.3}\n");
    }

    if report.failure_fraction > c.bench.max_failure_fraction {
        eprint!("{summary}");
        return Err(CliError::TooManyFailures {
            failed: (report.failure_fraction * set.trials.len() as f64).round() as usize,
            trials: set.trials.len(),
            allowed: c.bench.max_failure_fraction,
        });
    }
    Ok(summary)
}

pub fn sweep_points(cfg: &LoadedConfig, out: &Path) -> Result<PathBuf, CliError> {
    let c = &cfg.config;
    let prepared = cfg.experiment()?.prepare()?;
    let rows = scan_plan_sweep(&prepared, &c.bench.sweep_points, c.bench.sweep_trials, c.root_seed)?;
    prepare_output(cfg, out)?;
    let path = out.join("sweep_points.csv");
    let mut w = create(&path)?;
    write_sweep_csv(&rows, &mut w)?;
    finish(w, &path)?;
    Ok(path)
}

pub fn sweep_dispersion(cfg: &LoadedConfig, out: &Path) -> Result<PathBuf, CliError> {
    let c = &cfg.config;
    let experiment = cfg.experiment()?;
    let rows = dispersion_sensitivity_sweep(&experiment, &c.bench.sweep_beta2_l_s2, c.bench.sweep_trials, c.root_seed)?;
    prepare_output(cfg, out)?;
    let path = out.join("sweep_dispersion.csv");
    let mut w = create(&path)?;
    write_sweep_csv(&rows, &mut w)?;
    finish(w, &path)?;
    Ok(path)
}
