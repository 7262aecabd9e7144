//! Seeded experiment runs: configuration, Monte-Carlo trials, sweeps, and
//! CSV/JSON outputs.
//!
//! Every trial draws from its own ChaCha8 stream seeded by
//! `splitmix64(seed, trial)`, so results do not depend on the worker count.
//! The code pair and channel state come from a separate stream derived from
//! `code_seed` (default `seed`). Sweep point `i` runs with seed `seed ^ i`
//! and keeps the base code seed, so every point uses the same code pair.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{self, ChannelState, CompoundSet};
use crate::codec::{Decoder, Encoder};
use crate::construction_a::NestedPair;
use crate::error::{Error, Result};
use crate::gaussian::{CovarianceSpec, PeriodicGaussian};
use crate::lattice::{io, matrix_form, Lattice};
use crate::linalg::{RMat, RVec};
use crate::security::{security_report, SecurityReport};

/// Where the channel realization comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelSource {
    /// `H†H = αI` on both shells (worst case for the volume conditions).
    #[default]
    Isotropic,
    /// One random state per shell.
    Shell,
    /// `[h_b]` and `[h_e]` sections of `channel_file`.
    File,
}

/// Flat TOML experiment description. `sigma_s² = P`; SNRs are in dB.
/// Missing capacities default to `n_a ln(1 + ρ)`, the capacity of a unitary
/// channel at that SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: u64,
    pub n_a: usize,
    pub n_b: usize,
    pub n_e: usize,
    pub t: usize,
    pub k_b: usize,
    pub k_e: usize,
    pub sigma_s: f64,
    pub snr_b_db: f64,
    pub snr_e_db: f64,
    #[serde(default)]
    pub c_b: Option<f64>,
    #[serde(default)]
    pub c_e: Option<f64>,
    #[serde(default)]
    pub channel: ChannelSource,
    #[serde(default)]
    pub channel_file: Option<PathBuf>,
    #[serde(default)]
    pub pair_file: Option<PathBuf>,
    #[serde(default)]
    pub code_seed: Option<u64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub sweep_axis: Option<String>,
    #[serde(default)]
    pub sweep_values: Option<Vec<f64>>,
}

/// Numeric fields accepted as sweep axes.
pub const SWEEP_AXES: &[&str] = &["snr_b_db", "snr_e_db", "sigma_s", "c_b", "c_e", "p", "t", "k_b", "k_e", "trials", "alpha"];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative file references resolve against the config's directory.
        let base = path.parent().unwrap_or(Path::new("."));
        for f in [&mut cfg.channel_file, &mut cfg.pair_file].into_iter().flatten() {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_a == 0 || self.n_b == 0 || self.n_e == 0 || self.t == 0 {
            return bad("antenna counts and t must be positive".into());
        }
        if self.pair_file.is_none() && (self.k_e > self.k_b || self.k_b > 2 * self.n_a * self.t) {
            return bad(format!("need k_e <= k_b <= 2 n_a t, got k_e={}, k_b={}", self.k_e, self.k_b));
        }
        if !(self.sigma_s > 0.0) || !self.sigma_s.is_finite() {
            return bad(format!("sigma_s must be positive, got {}", self.sigma_s));
        }
        if !self.snr_b_db.is_finite() || !self.snr_e_db.is_finite() {
            return bad("SNRs must be finite".into());
        }
        if self.c_b.is_some_and(|v| !(v >= 0.0)) || self.c_e.is_some_and(|v| !(v >= 0.0)) {
            return bad("capacities must be nonnegative".into());
        }
        if self.alpha.is_some_and(|a| !(a >= 1.0)) {
            return bad("alpha must be at least 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        if self.channel == ChannelSource::File && self.channel_file.is_none() {
            return bad("channel = \"file\" needs channel_file".into());
        }
        if let Some(axis) = &self.sweep_axis {
            if !SWEEP_AXES.contains(&axis.as_str()) {
                return bad(format!("unknown sweep axis `{axis}`"));
            }
        }
        Ok(())
    }

    pub fn power(&self) -> f64 {
        self.sigma_s * self.sigma_s
    }

    pub fn rho_b(&self) -> f64 {
        10f64.powf(self.snr_b_db / 10.0)
    }

    pub fn rho_e(&self) -> f64 {
        10f64.powf(self.snr_e_db / 10.0)
    }

    /// First 16 hex digits of SHA-256 over the JSON form, with the fields
    /// that cannot affect results (`workers`, `out`) cleared.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        c.out = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Copy with a numeric field replaced.
    pub fn with_axis(&self, axis: &str, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidParameter(format!("axis `{axis}` needs a nonnegative integer, got {v}")))
            }
        };
        match axis {
            "snr_b_db" => c.snr_b_db = value,
            "snr_e_db" => c.snr_e_db = value,
            "sigma_s" => c.sigma_s = value,
            "c_b" => c.c_b = Some(value),
            "c_e" => c.c_e = Some(value),
            "alpha" => c.alpha = Some(value),
            "p" => c.p = as_count(value)? as u64,
            "t" => c.t = as_count(value)?,
            "k_b" => c.k_b = as_count(value)?,
            "k_e" => c.k_e = as_count(value)?,
            "trials" => c.trials = as_count(value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown sweep axis `{axis}`"))),
        }
        c.validate()?;
        Ok(c)
    }

    fn compound_set(&self, c_b: f64, c_e: f64) -> CompoundSet {
        let power = self.power();
        CompoundSet {
            n_a: self.n_a,
            n_b: self.n_b,
            n_e: self.n_e,
            power,
            sigma_b: (power / self.rho_b()).sqrt(),
            sigma_e: (power / self.rho_e()).sqrt(),
            c_b,
            c_e,
        }
    }
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under run seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial.wrapping_add(1)))
}

/// Seed for code and channel draws.
fn setup_seed(code_seed: u64) -> u64 {
    splitmix64(code_seed ^ 0xC0DE_5EED_0000_0000)
}

/// Everything a run needs besides the trial streams.
#[derive(Debug, Clone)]
pub struct Setup {
    pub pair: Arc<NestedPair>,
    pub set: CompoundSet,
    pub state: ChannelState,
}

pub fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(setup_seed(cfg.code_seed.unwrap_or(cfg.seed)));
    let pair = match &cfg.pair_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let pair = NestedPair::parse(&text)?;
            if pair.n_a() != cfg.n_a {
                return Err(Error::InvalidParameter(format!("pair file has n_a = {}, config {}", pair.n_a(), cfg.n_a)));
            }
            pair
        }
        None => NestedPair::sample(cfg.p, cfg.n_a, cfg.t, cfg.k_b, cfg.k_e, &mut rng)?,
    };
    let default_cap = |rho: f64| cfg.n_a.min(cfg.n_b.max(cfg.n_e)) as f64 * (1.0 + rho).ln();
    let (set, state) = match cfg.channel {
        ChannelSource::File => {
            let path = cfg.channel_file.as_ref().expect("validated");
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let sections = io::parse_sections(&text)?;
            let find = |name: &str| {
                sections
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, m)| m.clone())
                    .ok_or_else(|| Error::Parse(format!("channel file lacks a [{name}] section")))
            };
            let state = ChannelState { h_b: find("h_b")?, h_e: find("h_e")? };
            if state.h_b.shape() != (cfg.n_b, cfg.n_a) || state.h_e.shape() != (cfg.n_e, cfg.n_a) {
                return Err(Error::Shape(format!(
                    "channel file shapes {:?}, {:?} do not match n_b x n_a, n_e x n_a",
                    state.h_b.shape(),
                    state.h_e.shape()
                )));
            }
            let c_b = cfg.c_b.unwrap_or_else(|| channel::log_capacity(&state.h_b, cfg.rho_b()));
            let c_e = cfg.c_e.unwrap_or_else(|| channel::log_capacity(&state.h_e, cfg.rho_e()));
            let set = cfg.compound_set(c_b, c_e);
            state.check(&set)?;
            (set, state)
        }
        source => {
            let set = cfg.compound_set(
                cfg.c_b.unwrap_or_else(|| default_cap(cfg.rho_b())),
                cfg.c_e.unwrap_or_else(|| default_cap(cfg.rho_e())),
            );
            let state = match source {
                ChannelSource::Isotropic => channel::isotropic_state(&set)?,
                _ => channel::sample_state(&set, &mut rng)?,
            };
            (set, state)
        }
    };
    set.validate()?;
    Ok(Setup { pair: Arc::new(pair), set, state })
}

/// One row of the per-trial CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub config_hash: String,
    pub seed: u64,
    pub trial: u64,
    pub m: u64,
    pub m_hat: u64,
    pub err: u8,
    pub power: f64,
}

/// Aggregates of one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub config_hash: String,
    pub seed: u64,
    pub trials: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub mean_power: f64,
    pub messages: u64,
    pub snr_b_db: f64,
    pub snr_e_db: f64,
    pub sigma_s: f64,
    pub c_b: f64,
    pub c_e: f64,
    pub security: SecurityReport,
    pub runtime_secs: f64,
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = k as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let center = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    let low = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if k == n { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// Runs all trials of `cfg` (in parallel on `cfg.workers` threads).
pub fn run_trials(cfg: &ExperimentConfig, setup: &Setup) -> Result<Vec<TrialRecord>> {
    let hash = cfg.hash();
    let pair = setup.pair.clone();
    let encoder = Encoder::new(pair.clone(), cfg.sigma_s, setup.set.power)?;
    let decoder = Decoder::new(pair.clone(), &setup.state.h_b, setup.set.rho_b())?;
    let dim = (pair.n_a() * pair.t()) as f64;
    let sigma_b = setup.set.sigma_b;
    let one = |trial: u64| -> Result<TrialRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial));
        let m = rng.random_range(0..pair.message_count());
        let x = encoder.encode(m, &mut rng)?;
        let y = channel::apply_channel(&x, &setup.state.h_b, sigma_b, &mut rng)?;
        let m_hat = decoder.decode(&y)?;
        Ok(TrialRecord {
            config_hash: hash.clone(),
            seed: cfg.seed,
            trial,
            m,
            m_hat,
            err: u8::from(m != m_hat),
            power: x.norm_squared() / dim,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| (0..cfg.trials as u64).into_par_iter().map(one).collect())
}

/// Aggregates trial records and evaluates the security report for `cfg`.
pub fn summarize(cfg: &ExperimentConfig, setup: &Setup, records: &[TrialRecord], runtime_secs: f64) -> Result<SimulationReport> {
    let security = security_report(&setup.pair, &setup.set, &setup.state, cfg.sigma_s, cfg.alpha)?;
    let n = records.len();
    let errors = records.iter().filter(|r| r.err != 0).count();
    let (wilson_low, wilson_high) = wilson_interval(errors, n);
    Ok(SimulationReport {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        trials: n,
        errors,
        error_rate: if n == 0 { 0.0 } else { errors as f64 / n as f64 },
        wilson_low,
        wilson_high,
        mean_power: if n == 0 { 0.0 } else { records.iter().map(|r| r.power).sum::<f64>() / n as f64 },
        messages: setup.pair.message_count(),
        snr_b_db: cfg.snr_b_db,
        snr_e_db: cfg.snr_e_db,
        sigma_s: cfg.sigma_s,
        c_b: setup.set.c_b,
        c_e: setup.set.c_e,
        security,
        runtime_secs,
    })
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: SimulationReport,
    pub trials: Vec<TrialRecord>,
}

/// Runs `cfg` and, when `cfg.out` is set, writes `trials.csv` and
/// `summary.json` there.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let setup = setup(cfg)?;
    let trials = run_trials(cfg, &setup)?;
    let report = summarize(cfg, &setup, &trials, start.elapsed().as_secs_f64())?;
    if let Some(dir) = &cfg.out {
        write_run(dir, &trials, &report)?;
    }
    Ok(RunOutput { report, trials })
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn write_trials_csv<W: Write>(writer: W, trials: &[TrialRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["config_hash", "seed", "trial", "m", "m_hat", "err", "power"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for t in trials {
        w.serialize(t).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

fn write_run(dir: &Path, trials: &[TrialRecord], report: &SimulationReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let csv_path = dir.join("trials.csv");
    let file = fs::File::create(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    write_trials_csv(std::io::BufWriter::new(file), trials)?;
    write_json(&dir.join("summary.json"), report)
}

/// One point of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub axis: String,
    pub value: f64,
    pub report: SimulationReport,
}

/// Runs `cfg` once per value of `axis`. Point `i` uses seed `seed ^ i` and
/// the base code seed; outputs go to `out/point_<i>/` when `out` is set.
pub fn sweep(cfg: &ExperimentConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if !SWEEP_AXES.contains(&axis) {
        return Err(Error::InvalidParameter(format!("unknown sweep axis `{axis}`")));
    }
    let mut points = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let mut c = cfg.with_axis(axis, v)?;
        c.seed = cfg.seed ^ i as u64;
        c.code_seed = Some(cfg.code_seed.unwrap_or(cfg.seed));
        c.out = cfg.out.as_ref().map(|d| d.join(format!("point_{i}")));
        c.sweep_axis = None;
        c.sweep_values = None;
        let out = run(&c)?;
        points.push(SweepPoint { axis: axis.to_string(), value: v, report: out.report });
    }
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let path = dir.join("sweep.csv");
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        write_metrics_csv(file, &points)?;
        write_json(&dir.join("sweep.json"), &points)?;
    }
    Ok(points)
}

/// Metric-vs-axis table; header only for an empty set.
pub fn write_metrics_csv<W: Write>(writer: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([
        "config_hash",
        "seed",
        "axis",
        "value",
        "snr_b_db",
        "error_rate",
        "wilson_low",
        "wilson_high",
        "epsilon",
        "leakage_bound",
        "secrecy_margin",
        "reliability_margin",
    ])
    .map_err(io)?;
    for p in points {
        let r = &p.report;
        w.write_record([
            r.config_hash.clone(),
            r.seed.to_string(),
            p.axis.clone(),
            p.value.to_string(),
            r.snr_b_db.to_string(),
            r.error_rate.to_string(),
            r.wilson_low.to_string(),
            r.wilson_high.to_string(),
            r.security.epsilon.to_string(),
            r.security.leakage_bound.to_string(),
            r.security.secrecy.margin.to_string(),
            r.security.reliability.margin.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-run aggregate recomputed from trial rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub config_hash: String,
    pub seed: u64,
    pub trials: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub mean_power: f64,
}

/// Groups rows by `(config_hash, seed)` in order of first appearance.
pub fn aggregate_trials(records: &[TrialRecord]) -> Vec<TrialSummary> {
    let mut out: Vec<TrialSummary> = Vec::new();
    let mut power_sums: Vec<f64> = Vec::new();
    for r in records {
        let idx = match out.iter().position(|s| s.config_hash == r.config_hash && s.seed == r.seed) {
            Some(i) => i,
            None => {
                out.push(TrialSummary {
                    config_hash: r.config_hash.clone(),
                    seed: r.seed,
                    trials: 0,
                    errors: 0,
                    error_rate: 0.0,
                    wilson_low: 0.0,
                    wilson_high: 1.0,
                    mean_power: 0.0,
                });
                power_sums.push(0.0);
                out.len() - 1
            }
        };
        out[idx].trials += 1;
        out[idx].errors += usize::from(r.err != 0);
        power_sums[idx] += r.power;
    }
    for (s, p) in out.iter_mut().zip(power_sums) {
        s.error_rate = s.errors as f64 / s.trials as f64;
        (s.wilson_low, s.wilson_high) = wilson_interval(s.errors, s.trials);
        s.mean_power = p / s.trials as f64;
    }
    out
}

/// Summary table; header only when there are no runs.
pub fn write_summary_csv<W: Write>(writer: W, summaries: &[TrialSummary]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["config_hash", "seed", "trials", "errors", "error_rate", "wilson_low", "wilson_high", "mean_power"])
        .map_err(io)?;
    for s in summaries {
        w.serialize(s).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// One grid value of the periodic Gaussian on `Z²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicSample {
    pub x1: f64,
    pub x2: f64,
    pub value: f64,
}

/// Real covariances of the flat and the fading example, both with
/// determinant `1/16`: `M = I/4` and `M = diag(3/2, 1/24)`.
pub fn fading_example_covariances() -> [(&'static str, RMat); 2] {
    [
        ("isotropic", RMat::identity(2, 2) * 0.25),
        ("correlated", RMat::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.25 / 6.0])),
    ]
}

/// `f_{√Σ,Z²}(x)` on the grid `x ∈ {0, 1/g, ..., (g-1)/g}²`.
pub fn periodic_gaussian_grid(cov: &RMat, points_per_axis: usize) -> Result<Vec<PeriodicSample>> {
    let lattice = Lattice::gaussian_integers(1);
    let pg = PeriodicGaussian::new(&lattice, CovarianceSpec::from_real_embedding(cov.clone())?)?;
    let g = points_per_axis.max(1);
    let mut out = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            let (x1, x2) = (i as f64 / g as f64, j as f64 / g as f64);
            let value = pg.eval_real(&RVec::from_vec(vec![x1, x2]), 1e-14)?.value;
            out.push(PeriodicSample { x1, x2, value });
        }
    }
    Ok(out)
}

/// Grid data for both fading-example covariances as CSV
/// (`covariance,x1,x2,value`); returns the max/min ratio of each grid.
pub fn write_fading_figure<W: Write>(writer: W, points_per_axis: usize) -> Result<Vec<(String, f64)>> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["covariance", "x1", "x2", "value"]).map_err(io)?;
    let mut ratios = Vec::new();
    for (name, cov) in fading_example_covariances() {
        let grid = periodic_gaussian_grid(&cov, points_per_axis)?;
        let max = grid.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
        let min = grid.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
        ratios.push((name.to_string(), max / min));
        for s in grid {
            w.write_record([name.to_string(), s.x1.to_string(), s.x2.to_string(), s.value.to_string()])
                .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(ratios)
}

/// The code pair of a configuration in plain-text form.
pub fn pair_text(cfg: &ExperimentConfig) -> Result<String> {
    Ok(setup(cfg)?.pair.to_text())
}

/// First transmitted block of a configuration, for inspection.
pub fn sample_block(cfg: &ExperimentConfig, m: u64) -> Result<crate::linalg::CMat> {
    let s = setup(cfg)?;
    let enc = Encoder::new(s.pair.clone(), cfg.sigma_s, s.set.power)?;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, 0));
    let x = enc.encode_vector(m, &mut rng)?;
    matrix_form(x.as_slice(), s.pair.n_a(), s.pair.t())
}
