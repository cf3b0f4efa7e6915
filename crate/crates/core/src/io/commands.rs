//! Command implementations. The binary only parses arguments and maps
//! errors to exit codes.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::detector::{AlarmDecision, BaselineStats, Detector, ThresholdMode};
use crate::harness::{
    self, resolve_thresholds, run_scenario, Calibration, RunMetrics, ScenarioOutcome,
    ScenarioSpec, SeedPolicy, SweepParam,
};

use super::config::{parse_scenario, render_scenario};
use super::{csv, IoError};

pub const TRACE_FILE: &str = "trace.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const ECHO_FILE: &str = "scenario.echo.cfg";
pub const SWEEP_FILE: &str = "sweep.csv";

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })
}

fn ensure_dir(dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|source| IoError::File {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes `trace.csv`, `metrics.csv` and `scenario.echo.cfg` into `dir`.
pub fn emit(spec: &ScenarioSpec, outcome: &ScenarioOutcome, dir: &Path) -> Result<(), IoError> {
    ensure_dir(dir)?;
    let layout = &spec.scene.layout;
    let pairing = spec.detector.pairing;
    csv::write_trace(create(&dir.join(TRACE_FILE))?, layout, pairing, &outcome.trace)?;
    csv::write_metrics(create(&dir.join(METRICS_FILE))?, &outcome.metrics)?;
    let mut echo = create(&dir.join(ECHO_FILE))?;
    echo.write_all(render_scenario(spec, Some(&outcome.resolved)).as_bytes())?;
    echo.flush()?;
    Ok(())
}

pub fn simulate(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
) -> Result<(ScenarioSpec, ScenarioOutcome), IoError> {
    let mut spec = parse_scenario(config)?.spec;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let outcome = run_scenario(&spec)?;
    emit(&spec, &outcome, out)?;
    Ok((spec, outcome))
}

/// Baseline statistics next to both threshold rules.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub stats: BaselineStats,
    pub k: f64,
    pub calibrated: f64,
    pub chi_squared: f64,
    pub max_abs_step: f64,
}

impl fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "baseline_runs          {}", self.stats.count)?;
        writeln!(f, "mean                   {:.6}", self.stats.mean)?;
        writeln!(f, "std                    {:.6}", self.stats.std)?;
        writeln!(f, "k                      {}", self.k)?;
        writeln!(f, "mean + k*std           {:.6}", self.calibrated)?;
        writeln!(f, "chi_squared_eta        {:.6}", self.chi_squared)?;
        write!(f, "max_abs_step           {:.6}", self.max_abs_step)
    }
}

pub fn calibrate(config: &Path, runs: u64) -> Result<CalibrationReport, IoError> {
    if runs < 2 {
        return Err(IoError::Argument(format!("--runs must be >= 2, got {runs}")));
    }
    let spec = parse_scenario(config)?.spec;
    let k = match spec.detector.threshold_mode {
        ThresholdMode::Calibrated { k } => k,
        ThresholdMode::ChiSquared => 2.0,
    };
    let pass = Calibration::run(&spec, runs);
    let stats = pass.stats().map_err(harness::ScenarioError::from)?;
    let chi_squared = crate::detector::chi_squared_threshold(&spec.detector)
        .map_err(harness::ScenarioError::from)?;
    Ok(CalibrationReport {
        stats,
        k,
        calibrated: stats.threshold(k),
        chi_squared,
        max_abs_step: pass.max_abs_step(),
    })
}

/// Runs the detector over recorded frames and writes decision rows to `out`.
///
/// Thresholds come from the file's `[resolved]` section when present,
/// otherwise from a calibration pass exactly as `simulate` would run it.
pub fn detect<W: Write>(config: &Path, frames: &Path, out: W) -> Result<Vec<AlarmDecision>, IoError> {
    let file = parse_scenario(config)?;
    let spec = file.spec;
    let thresholds = match file.resolved {
        Some(t) => t,
        None => resolve_thresholds(&spec)?.thresholds,
    };
    let input = File::open(frames).map_err(|source| IoError::File {
        path: frames.to_path_buf(),
        source,
    })?;
    let frames = csv::read_frames(input, spec.scene.layout.sensor_count())?;
    let mut detector = Detector::new(spec.scene.layout.clone(), spec.detector.pairing, thresholds);
    let decisions = frames
        .iter()
        .map(|f| detector.observe(f).map_err(harness::ScenarioError::from))
        .collect::<Result<Vec<_>, _>>()?;
    csv::write_decisions(out, &spec.scene.layout, spec.detector.pairing, &decisions)?;
    Ok(decisions)
}

pub fn parse_values(list: &str) -> Result<Vec<f64>, IoError> {
    if list.trim().is_empty() {
        return Ok(Vec::new());
    }
    list.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| IoError::Argument(format!("bad sweep value `{}`", v.trim())))
        })
        .collect()
}

/// Runs one scenario per value (common random numbers) and writes
/// `sweep.csv` into `out`.
pub fn sweep(
    config: &Path,
    param: &str,
    values: &[f64],
    out: &Path,
) -> Result<Vec<RunMetrics>, IoError> {
    let spec = parse_scenario(config)?.spec;
    let param: SweepParam = param.parse()?;
    for &v in values {
        param.apply(&spec, v).validate().map_err(IoError::Validation)?;
    }
    let results = harness::sweep(&spec, param, values, SeedPolicy::Common)?;
    ensure_dir(out)?;
    csv::write_sweep(create(&out.join(SWEEP_FILE))?, param.name(), values, &results)?;
    Ok(results)
}
