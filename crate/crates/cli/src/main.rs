use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wiretap_core::channel::{quantize_channel_space, Region};
use wiretap_core::experiment::{self, ExperimentConfig};
use wiretap_core::security::security_report;
use wiretap_core::Error;

#[derive(Parser)]
#[command(name = "wiretap", version, about = "Lattice coset coding experiments for MIMO wiretap channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for trials.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionArg {
    Shell,
    Ball,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureId {
    /// Periodic Gaussian over [0,1)^2 for a flat and a fading covariance.
    Fading,
    /// Run summaries recomputed from trial CSVs.
    Metrics,
}

#[derive(Subcommand)]
enum Command {
    /// Flatness factor, VNR margins and leakage bound of a configuration.
    Flatness(Common),
    /// Monte-Carlo error rate of the coset code.
    Simulate(Common),
    /// Repeats `simulate` along one numeric config field.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Field to vary (defaults to `sweep_axis` in the config).
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values (defaults to `sweep_values`).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Covers the eavesdropper covariance set to spectral radius delta.
    Quantize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value = "shell")]
        region: RegionArg,
        #[arg(long, default_value_t = 2000)]
        probes: usize,
        #[arg(long, default_value_t = 2000)]
        validation: usize,
    },
    /// Aggregates trial CSVs (files, or directories holding trials.csv).
    Report {
        inputs: Vec<PathBuf>,
        /// Writes the table to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes plot data.
    Figure {
        #[arg(long, value_enum, default_value = "fading")]
        id: FigureId,
        /// Grid points per axis for the fading figure.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Trial CSVs for the metrics figure.
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    if common.workers.is_some() {
        cfg.workers = common.workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(fs::File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)
        }
        None => Box::new(std::io::stdout()),
    })
}

fn read_inputs(inputs: &[PathBuf]) -> Result<Vec<experiment::TrialRecord>, Error> {
    let mut all = Vec::new();
    for p in inputs {
        let file = if p.is_dir() { p.join("trials.csv") } else { p.clone() };
        all.extend(experiment::read_trials_csv(&file)?);
    }
    Ok(all)
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Flatness(common) => {
            let cfg = load(&common)?;
            let setup = experiment::setup(&cfg)?;
            let report = security_report(&setup.pair, &setup.set, &setup.state, cfg.sigma_s, cfg.alpha)?;
            if let Some(dir) = &cfg.out {
                fs::create_dir_all(dir)?;
                experiment::write_json(&dir.join("flatness.json"), &report)?;
            }
            print_json(&report)
        }
        Command::Simulate(common) => {
            let cfg = load(&common)?;
            let out = experiment::run(&cfg)?;
            print_json(&out.report)
        }
        Command::Sweep { common, axis, values } => {
            let cfg = load(&common)?;
            let axis = axis
                .or_else(|| cfg.sweep_axis.clone())
                .ok_or_else(|| Error::InvalidParameter("no sweep axis given".into()))?;
            let values = values
                .or_else(|| cfg.sweep_values.clone())
                .ok_or_else(|| Error::InvalidParameter("no sweep values given".into()))?;
            let points = experiment::sweep(&cfg, &axis, &values)?;
            experiment::write_metrics_csv(std::io::stdout(), &points)
        }
        Command::Quantize { common, delta, region, probes, validation } => {
            let cfg = load(&common)?;
            let setup = experiment::setup(&cfg)?;
            let region = match region {
                RegionArg::Shell => Region::Shell,
                RegionArg::Ball => Region::Ball,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let covering = quantize_channel_space(&setup.set, cfg.sigma_s, delta, region, probes, validation, &mut rng)?;
            if let Some(dir) = &cfg.out {
                fs::create_dir_all(dir)?;
                experiment::write_json(&dir.join("covering.json"), &covering)?;
            }
            print_json(&covering)
        }
        Command::Report { inputs, out } => {
            let summaries = experiment::aggregate_trials(&read_inputs(&inputs)?);
            experiment::write_summary_csv(output(out.as_deref())?, &summaries)
        }
        Command::Figure { id, grid, inputs, out } => match id {
            FigureId::Fading => {
                let ratios = experiment::write_fading_figure(output(out.as_deref())?, grid)?;
                for (name, r) in ratios {
                    eprintln!("{name}: max/min = {r:.6}");
                }
                Ok(())
            }
            FigureId::Metrics => {
                let summaries = experiment::aggregate_trials(&read_inputs(&inputs)?);
                experiment::write_summary_csv(output(out.as_deref())?, &summaries)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
