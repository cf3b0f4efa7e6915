//! Seeded Monte Carlo scenarios: measure, inject, detect, score.
//!
//! A scenario first runs an attack-free calibration pass on a forked seed
//! (so calibration never sees the evaluation draws), resolves the spatial and
//! temporal thresholds, then streams `runs` frames through one [`Detector`].

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::attacks::{inject, AttackError, AttackSchedule};
use crate::detector::{
    chi_squared_threshold, residuals_with, temporal_bound_from_baseline, AlarmDecision,
    BaselineStats, Detector, DetectorConfig, DetectorError, ThresholdMode, Thresholds,
};
use crate::geometry::{GeometryError, Scene};
use crate::sensing::{measure, mix_seed, MeasurementFrame, NoiseModel, RngStreams, SensingError};

/// Fork label for the calibration pass's random streams.
pub const CALIBRATION_STREAM: u64 = 0xCA1B;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown sweep parameter `{0}` (expected one of: {names})", names = SweepParam::NAMES.join(", "))]
    UnknownParameter(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scene: Scene,
    pub noise: NoiseModel,
    pub schedule: AttackSchedule,
    pub runs: u64,
    pub seed: u64,
    pub detector: DetectorConfig,
    pub calibration_runs: u64,
}

impl ScenarioSpec {
    /// Structural checks. Attack kind semantics are checked separately by
    /// [`ScenarioSpec::validate_strict`].
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.runs == 0 {
            return Err(ScenarioError::Invalid("runs must be >= 1".into()));
        }
        self.noise.validate()?;
        self.detector.validate()?;
        let needs_baseline = matches!(self.detector.threshold_mode, ThresholdMode::Calibrated { .. })
            || self.detector.temporal_threshold.is_none();
        if needs_baseline && self.calibration_runs < 2 {
            return Err(ScenarioError::Invalid(format!(
                "calibration_runs must be >= 2 for a calibrated or derived threshold, got {}",
                self.calibration_runs
            )));
        }
        self.schedule
            .validate_sensors(self.scene.layout.sensor_count())?;
        if let Some(e) = self.schedule.entries().iter().find(|e| e.onset_run >= self.runs) {
            return Err(ScenarioError::Invalid(format!(
                "attack on sensor {} starts at run {} but the scenario has only {} runs",
                e.sensor, e.onset_run, self.runs
            )));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus: triggering spoofs lie below the
    /// true distance and deflection spoofs beyond every true range.
    pub fn validate_strict(&self) -> Result<(), ScenarioError> {
        self.validate()?;
        self.schedule.validate_for(&self.scene)?;
        Ok(())
    }
}

/// Thresholds plus what they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedThresholds {
    pub thresholds: Thresholds,
    /// Always computed, even when the calibrated threshold is in force.
    pub chi_squared: f64,
    pub baseline: Option<BaselineStats>,
}

/// Attack-free calibration pass.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub frames: Vec<MeasurementFrame>,
    pub aggregates: Vec<f64>,
}

impl Calibration {
    pub fn run(spec: &ScenarioSpec, runs: u64) -> Self {
        let streams = RngStreams::new(spec.seed).fork(CALIBRATION_STREAM);
        let frames: Vec<MeasurementFrame> = (0..runs)
            .map(|run| measure(&spec.scene, &spec.noise, &streams, run))
            .collect();
        let aggregates = frames
            .iter()
            .map(|f| residuals_with(f, &spec.scene.layout, spec.detector.pairing).aggregate)
            .collect();
        Self { frames, aggregates }
    }

    pub fn stats(&self) -> Result<BaselineStats, DetectorError> {
        BaselineStats::from_aggregates(&self.aggregates)
    }

    pub fn max_abs_step(&self) -> f64 {
        self.frames
            .windows(2)
            .flat_map(|w| w[1].ranges.iter().zip(&w[0].ranges).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

pub fn resolve_thresholds(spec: &ScenarioSpec) -> Result<ResolvedThresholds, ScenarioError> {
    spec.validate()?;
    let chi_squared = chi_squared_threshold(&spec.detector)?;
    let calibration = (spec.calibration_runs >= 2)
        .then(|| Calibration::run(spec, spec.calibration_runs));
    let baseline = calibration.as_ref().map(|c| c.stats()).transpose()?;

    let spatial = match spec.detector.threshold_mode {
        ThresholdMode::ChiSquared => chi_squared,
        ThresholdMode::Calibrated { k } => baseline
            .ok_or(DetectorError::InsufficientBaseline(0))?
            .threshold(k),
    };
    let temporal = match (spec.detector.temporal_threshold, &calibration) {
        (Some(t), _) => t,
        (None, Some(c)) => temporal_bound_from_baseline(&c.frames)?,
        (None, None) => return Err(DetectorError::InsufficientBaseline(0).into()),
    };
    Ok(ResolvedThresholds {
        thresholds: Thresholds { spatial, temporal },
        chi_squared,
        baseline,
    })
}

/// Runs between an attack window's onset and its first fused alarm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Latency {
    Detected(u64),
    Missed,
}

impl fmt::Display for Latency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Latency::Detected(n) => write!(f, "{n}"),
            Latency::Missed => f.write_str("missed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub runs: u64,
    pub attacked_runs: u64,
    pub clean_runs: u64,
    /// Aggregate residual per run.
    pub residual_trace: Vec<f64>,
    /// Per-sensor step change, one entry per run after the first.
    pub delta_trace: Vec<Vec<f64>>,
    /// `None` when every run was attacked.
    pub false_positive_rate: Option<f64>,
    /// `None` when no run was attacked.
    pub detection_rate: Option<f64>,
    /// Detection rate restricted to runs where each sensor was attacked.
    pub per_sensor_detection: Vec<Option<f64>>,
    /// One entry per schedule entry, in schedule order.
    pub detection_latency: Vec<Latency>,
    pub threshold_used: f64,
    pub temporal_threshold_used: f64,
    pub chi_squared_threshold: f64,
    pub baseline: Option<BaselineStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    /// Post-injection frame, including the ground-truth mask.
    pub frame: MeasurementFrame,
    pub decision: AlarmDecision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub metrics: RunMetrics,
    pub trace: Vec<TraceRow>,
    pub resolved: ResolvedThresholds,
}

pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioOutcome, ScenarioError> {
    let resolved = resolve_thresholds(spec)?;
    let mut detector = Detector::new(
        spec.scene.layout.clone(),
        spec.detector.pairing,
        resolved.thresholds,
    );
    let streams = RngStreams::new(spec.seed);
    let mut trace = Vec::with_capacity(spec.runs as usize);
    for run in 0..spec.runs {
        let clean = measure(&spec.scene, &spec.noise, &streams, run);
        let frame = inject(&clean, &spec.schedule)?;
        let decision = detector.observe(&frame)?;
        trace.push(TraceRow { frame, decision });
    }
    let metrics = score(spec, &trace, &resolved);
    Ok(ScenarioOutcome {
        metrics,
        trace,
        resolved,
    })
}

fn rate(hits: u64, total: u64) -> Option<f64> {
    (total > 0).then(|| hits as f64 / total as f64)
}

fn score(spec: &ScenarioSpec, trace: &[TraceRow], resolved: &ResolvedThresholds) -> RunMetrics {
    let n = spec.scene.layout.sensor_count();
    let (mut clean, mut clean_alarms, mut attacked, mut hits) = (0, 0, 0, 0);
    let mut sensor_runs = vec![0u64; n];
    let mut sensor_hits = vec![0u64; n];
    for row in trace {
        let fused = row.decision.fused;
        if row.frame.any_attacked() {
            attacked += 1;
            hits += u64::from(fused);
        } else {
            clean += 1;
            clean_alarms += u64::from(fused);
        }
        for (i, &a) in row.frame.attacked.iter().enumerate() {
            if a {
                sensor_runs[i] += 1;
                sensor_hits[i] += u64::from(fused);
            }
        }
    }

    let detection_latency = spec
        .schedule
        .entries()
        .iter()
        .map(|e| {
            let end = e.end_run().unwrap_or(spec.runs).min(spec.runs);
            (e.onset_run..end)
                .find(|&run| trace[run as usize].decision.fused)
                .map_or(Latency::Missed, |run| Latency::Detected(run - e.onset_run))
        })
        .collect();

    RunMetrics {
        runs: spec.runs,
        attacked_runs: attacked,
        clean_runs: clean,
        residual_trace: trace.iter().map(|r| r.decision.residuals.aggregate).collect(),
        delta_trace: trace
            .iter()
            .skip(1)
            .map(|r| {
                r.decision
                    .temporal
                    .iter()
                    .map(|t| t.delta.expect("every frame after the first has a predecessor"))
                    .collect()
            })
            .collect(),
        false_positive_rate: rate(clean_alarms, clean),
        detection_rate: rate(hits, attacked),
        per_sensor_detection: sensor_hits
            .iter()
            .zip(&sensor_runs)
            .map(|(&h, &t)| rate(h, t))
            .collect(),
        detection_latency,
        threshold_used: resolved.thresholds.spatial,
        temporal_threshold_used: resolved.thresholds.temporal,
        chi_squared_threshold: resolved.chi_squared,
        baseline: resolved.baseline,
    }
}

/// Scenario fields a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Every attack entry's spoof range.
    SpoofRange,
    TemporalThreshold,
    /// Calibration multiplier; switches a chi-squared scenario to calibrated.
    K,
    Sigma,
    Alpha,
    /// Uniform width `hi − lo` (a noiseless scenario becomes `U(0, w)`);
    /// for Gaussian noise, the standard deviation.
    NoiseWidth,
}

impl SweepParam {
    pub const NAMES: [&'static str; 6] = [
        "spoof_range",
        "temporal_threshold",
        "k",
        "sigma",
        "alpha",
        "noise_width",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::SpoofRange => "spoof_range",
            SweepParam::TemporalThreshold => "temporal_threshold",
            SweepParam::K => "k",
            SweepParam::Sigma => "sigma",
            SweepParam::Alpha => "alpha",
            SweepParam::NoiseWidth => "noise_width",
        }
    }

    pub fn apply(&self, spec: &ScenarioSpec, value: f64) -> ScenarioSpec {
        let mut out = spec.clone();
        match self {
            SweepParam::SpoofRange => out.schedule = spec.schedule.with_spoof_range(value),
            SweepParam::TemporalThreshold => out.detector.temporal_threshold = Some(value),
            SweepParam::K => out.detector.threshold_mode = ThresholdMode::Calibrated { k: value },
            SweepParam::Sigma => out.detector.sigma = value,
            SweepParam::Alpha => out.detector.alpha = value,
            SweepParam::NoiseWidth => {
                out.noise = match spec.noise {
                    NoiseModel::None => NoiseModel::Uniform { lo: 0.0, hi: value },
                    NoiseModel::Uniform { lo, .. } => NoiseModel::Uniform { lo, hi: lo + value },
                    NoiseModel::Gaussian { mean, .. } => NoiseModel::Gaussian { mean, sigma: value },
                }
            }
        }
        out
    }
}

impl FromStr for SweepParam {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "spoof_range" => SweepParam::SpoofRange,
            "temporal_threshold" => SweepParam::TemporalThreshold,
            "k" => SweepParam::K,
            "sigma" => SweepParam::Sigma,
            "alpha" => SweepParam::Alpha,
            "noise_width" => SweepParam::NoiseWidth,
            other => return Err(ScenarioError::UnknownParameter(other.to_string())),
        })
    }
}

/// How sweep points are seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedPolicy {
    /// Every point reuses the base seed, so points differ only in the swept
    /// parameter (common random numbers).
    #[default]
    Common,
    /// Point `i` uses `mix_seed(base, i)`.
    PerPoint,
}

impl SeedPolicy {
    pub fn seed_for(&self, base: u64, index: usize) -> u64 {
        match self {
            SeedPolicy::Common => base,
            SeedPolicy::PerPoint => mix_seed(base, index as u64),
        }
    }
}

/// One scenario per value, run in parallel and returned in input order.
pub fn sweep(
    spec: &ScenarioSpec,
    param: SweepParam,
    values: &[f64],
    seeds: SeedPolicy,
) -> Result<Vec<RunMetrics>, ScenarioError> {
    values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut point = param.apply(spec, v);
            point.seed = seeds.seed_for(spec.seed, i);
            run_scenario(&point).map(|o| o.metrics)
        })
        .collect()
}
