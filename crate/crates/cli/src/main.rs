mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qoct_core::estimator::{BandMode, FitWeighting, Mode};

use commands::CliError;
use config::{LoadedConfig, TuningOverrides};

/// Dual-core HOM/OCT simulation and Fourier-phase delay estimation.
///
/// Exit status: 0 on success, 2 for bad configuration, records or I/O,
/// 3 when an estimate (or too many benchmark trials) failed.
#[derive(Debug, Parser)]
#[command(name = "qoct", version)]
struct Cli {
    /// TOML run configuration; the built-in reference setup when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Replaces `root_seed` of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replaces `output_dir` of the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one core pair and write its four scan records.
    Simulate,
    /// Estimate the delay offset between two recorded scans; prints JSON.
    Estimate {
        record1: PathBuf,
        record2: PathBuf,
        #[arg(long)]
        mode: Mode,
        #[command(flatten)]
        tuning: TuningFlags,
    },
    /// Monte-Carlo precision benchmark of both estimators.
    Bench {
        /// Replaces `bench.trials` of the configuration.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Precision against the number of scan points at fixed scan time.
    SweepPoints {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Precision and curve widths against quadratic sample dispersion.
    SweepDispersion {
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct TuningFlags {
    #[arg(long, value_parser = parse_band)]
    band: Option<BandMode>,
    #[arg(long)]
    band_lo_per_m: Option<f64>,
    #[arg(long)]
    band_hi_per_m: Option<f64>,
    #[arg(long)]
    amplitude_floor: Option<f64>,
    #[arg(long)]
    exclusion_halfwidth_m: Option<f64>,
    #[arg(long)]
    smoothing_width_m: Option<f64>,
    #[arg(long)]
    uniform_weights: bool,
    #[arg(long)]
    no_demodulate: bool,
}

impl TuningFlags {
    fn overrides(&self) -> TuningOverrides {
        TuningOverrides {
            band: self.band,
            band_lo_per_m: self.band_lo_per_m,
            band_hi_per_m: self.band_hi_per_m,
            amplitude_floor: self.amplitude_floor,
            exclusion_halfwidth_m: self.exclusion_halfwidth_m,
            smoothing_width_m: self.smoothing_width_m,
            weighting: self.uniform_weights.then_some(FitWeighting::Uniform),
            demodulate: self.no_demodulate.then_some(false),
            ..TuningOverrides::default()
        }
    }
}

fn parse_band(s: &str) -> Result<BandMode, String> {
    match s {
        "quantum_lowpass" => Ok(BandMode::QuantumLowpass),
        "classical_sideband" => Ok(BandMode::ClassicalSideband),
        "pump_fringe" => Ok(BandMode::PumpFringe),
        _ => Err("expected quantum_lowpass, classical_sideband or pump_fringe".into()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => LoadedConfig::load(path)?,
        None => LoadedConfig::builtin(),
    };
    if let Some(seed) = cli.seed {
        cfg.config.root_seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.config.output_dir = out;
    }
    let out = cfg.config.output_dir.clone();

    match cli.command {
        Command::Simulate => {
            for path in commands::simulate(&cfg, &out)? {
                println!("{}", path.display());
            }
        }
        Command::Estimate {
            record1,
            record2,
            mode,
            tuning,
        } => {
            println!("{}", commands::estimate(&cfg, &record1, &record2, mode, &tuning.overrides())?);
        }
        Command::Bench { trials } => {
            if let Some(n) = trials {
                cfg.config.bench.trials = n;
            }
            print!("{}", commands::bench(&cfg, &out)?);
        }
        Command::SweepPoints { trials } => {
            if let Some(n) = trials {
                cfg.config.bench.sweep_trials = n;
            }
            println!("{}", commands::sweep_points(&cfg, &out)?.display());
        }
        Command::SweepDispersion { trials } => {
            if let Some(n) = trials {
                cfg.config.bench.sweep_trials = n;
            }
            println!("{}", commands::sweep_dispersion(&cfg, &out)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qoct: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
