//! Two-stage spoofing detector.
//!
//! The spatial stage projects every corroborating sensor onto the reference
//! axis and sums the absolute disagreements with the reference range. The
//! temporal stage flags any per-sensor step change larger than a plausibility
//! bound. Any geometrically impossible range raises its own alarm. The fused
//! verdict is the OR of all three.
//!
//! ```text
//!   ranges ──► residuals ──► Σ|rᵢ| > η ?            ──┐
//!          ├─► projection infeasible ?               ──┼─► fused
//!          └─► |s(t) − s(t−1)| > bound ? (per sensor) ──┘
//! ```

mod chi2;

pub use chi2::{
    chi_squared_cdf, chi_squared_quantile, ln_gamma, regularized_lower_gamma, QUANTILE_TOL,
};

use thiserror::Error;

use crate::geometry::{project_to_reference, SensorId, SensorLayout};
use crate::sensing::{MeasurementFrame, NoiseModel};

/// Multiplier applied to the largest calibration step change when the
/// temporal bound is derived automatically.
pub const TEMPORAL_MARGIN: f64 = 1.5;

/// Floor for a derived temporal bound, so a noiseless baseline still yields
/// a positive bound.
pub const MIN_TEMPORAL_BOUND: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("chi-squared quantile bisection failed (dof {dof}, p {p})")]
    NonConvergence { dof: u32, p: f64 },
    #[error("calibration needs at least 2 baseline reports, got {0}")]
    InsufficientBaseline(usize),
    #[error("frames {prev} and {curr} are not consecutive")]
    FrameGap { prev: u64, curr: u64 },
    #[error("frame has {got} ranges, layout has {expected} sensors")]
    WrongWidth { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// `η = σ·sqrt(χ²(dof, α))`.
    ChiSquared,
    /// Mean plus `k` sample standard deviations of an attack-free baseline.
    Calibrated { k: f64 },
}

/// Which sensor pairs contribute residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// Reference against every other sensor (`n - 1` pairs).
    #[default]
    Reference,
    /// Additionally every pair of non-reference sensors, both projected.
    AllPairs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub sigma: f64,
    pub alpha: f64,
    pub dof: u32,
    pub threshold_mode: ThresholdMode,
    /// `None` derives the bound from the calibration baseline.
    pub temporal_threshold: Option<f64>,
    pub pairing: Pairing,
}

impl DetectorConfig {
    /// Defaults for a layout and noise model: `σ` from the noise model,
    /// `α = 0.95`, `dof = sensors − 1`, calibrated `k = 2`, derived
    /// temporal bound.
    pub fn defaults_for(layout: &SensorLayout, noise: &NoiseModel) -> Self {
        Self {
            sigma: noise.std_dev(),
            alpha: 0.95,
            dof: (layout.sensor_count() - 1) as u32,
            threshold_mode: ThresholdMode::Calibrated { k: 2.0 },
            temporal_threshold: None,
            pairing: Pairing::Reference,
        }
    }

    pub fn validate(&self) -> Result<(), DetectorError> {
        let bad = |m: String| Err(DetectorError::InvalidConfig(m));
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.dof == 0 {
            return bad("dof must be >= 1".into());
        }
        if let ThresholdMode::Calibrated { k } = self.threshold_mode {
            if !(k.is_finite() && k > 0.0) {
                return bad(format!("k must be finite and > 0, got {k}"));
            }
        }
        if let Some(t) = self.temporal_threshold {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("temporal_threshold must be finite and > 0, got {t}"));
            }
        }
        Ok(())
    }
}

/// Residual between two sensors' reference-axis estimates:
/// `first_estimate − second_estimate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairResidual {
    pub first: SensorId,
    pub second: SensorId,
    /// `None` when either side's projection is infeasible.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub pairs: Vec<PairResidual>,
    /// Σ|rᵢ| over feasible pairs.
    pub aggregate: f64,
    /// Σrᵢ over feasible pairs, for inspection only.
    pub signed_sum: f64,
    pub infeasible: Vec<SensorId>,
}

/// Reference-pairing residuals.
pub fn residuals(frame: &MeasurementFrame, layout: &SensorLayout) -> ResidualReport {
    residuals_with(frame, layout, Pairing::Reference)
}

pub fn residuals_with(
    frame: &MeasurementFrame,
    layout: &SensorLayout,
    pairing: Pairing,
) -> ResidualReport {
    let reference = layout.reference();
    let estimates: Vec<Option<f64>> = (0..layout.sensor_count())
        .map(|i| {
            if i == reference {
                Some(frame.ranges[i])
            } else {
                project_to_reference(frame.ranges[i], layout.baseline(i)).ok()
            }
        })
        .collect();
    let infeasible = estimates
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.is_none().then_some(i))
        .collect();

    let mut pairs: Vec<(SensorId, SensorId)> =
        layout.corroborators().map(|i| (reference, i)).collect();
    if pairing == Pairing::AllPairs {
        let others: Vec<SensorId> = layout.corroborators().collect();
        for (n, &i) in others.iter().enumerate() {
            for &j in &others[n + 1..] {
                pairs.push((i, j));
            }
        }
    }

    let pairs: Vec<PairResidual> = pairs
        .into_iter()
        .map(|(first, second)| PairResidual {
            first,
            second,
            value: estimates[first].zip(estimates[second]).map(|(a, b)| a - b),
        })
        .collect();
    let feasible = || pairs.iter().filter_map(|p| p.value);
    ResidualReport {
        aggregate: feasible().map(f64::abs).sum(),
        signed_sum: feasible().sum(),
        pairs,
        infeasible,
    }
}

/// `σ·sqrt(χ²_{dof, α})`.
pub fn chi_squared_threshold(config: &DetectorConfig) -> Result<f64, DetectorError> {
    config.validate()?;
    let q = chi_squared_quantile(config.dof, config.alpha)?;
    Ok(config.sigma * q.sqrt())
}

/// Mean and sample standard deviation of baseline aggregate residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

impl BaselineStats {
    pub fn from_aggregates(values: &[f64]) -> Result<Self, DetectorError> {
        if values.len() < 2 {
            return Err(DetectorError::InsufficientBaseline(values.len()));
        }
        let n = values.len() as f64;
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        // Clamped so a constant baseline reproduces its value exactly.
        let mean = (values.iter().sum::<f64>() / n).clamp(lo, hi);
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok(Self {
            count: values.len(),
            mean,
            std: var.sqrt(),
        })
    }

    pub fn threshold(&self, k: f64) -> f64 {
        self.mean + k * self.std
    }
}

/// `mean + k·std` of the baseline aggregates (sample std).
pub fn calibrate_threshold(baseline: &[ResidualReport], k: f64) -> Result<f64, DetectorError> {
    let aggregates: Vec<f64> = baseline.iter().map(|r| r.aggregate).collect();
    Ok(BaselineStats::from_aggregates(&aggregates)?.threshold(k))
}

/// Signed per-sensor change `curr − prev`.
pub fn temporal_change(
    prev: &MeasurementFrame,
    curr: &MeasurementFrame,
) -> Result<Vec<f64>, DetectorError> {
    if prev.run_index.checked_add(1) != Some(curr.run_index) {
        return Err(DetectorError::FrameGap {
            prev: prev.run_index,
            curr: curr.run_index,
        });
    }
    if prev.ranges.len() != curr.ranges.len() {
        return Err(DetectorError::WrongWidth {
            expected: prev.ranges.len(),
            got: curr.ranges.len(),
        });
    }
    Ok(curr
        .ranges
        .iter()
        .zip(&prev.ranges)
        .map(|(c, p)| c - p)
        .collect())
}

/// Automatic temporal bound: largest absolute step seen in an attack-free
/// frame sequence, times [`TEMPORAL_MARGIN`].
pub fn temporal_bound_from_baseline(frames: &[MeasurementFrame]) -> Result<f64, DetectorError> {
    if frames.len() < 2 {
        return Err(DetectorError::InsufficientBaseline(frames.len()));
    }
    let mut max_step: f64 = 0.0;
    for w in frames.windows(2) {
        for d in temporal_change(&w[0], &w[1])? {
            max_step = max_step.max(d.abs());
        }
    }
    Ok((max_step * TEMPORAL_MARGIN).max(MIN_TEMPORAL_BOUND))
}

/// Resolved alarm limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub spatial: f64,
    pub temporal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalVerdict {
    pub alarm: bool,
    /// `None` on the first frame of a stream.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlarmDecision {
    pub run_index: u64,
    pub residuals: ResidualReport,
    pub spatial_alarm: bool,
    pub spatial_threshold: f64,
    pub temporal: Vec<TemporalVerdict>,
    pub temporal_threshold: f64,
    pub infeasibility_alarm: bool,
    pub fused: bool,
}

impl AlarmDecision {
    pub fn any_temporal(&self) -> bool {
        self.temporal.iter().any(|t| t.alarm)
    }
}

/// Runs both stages on one frame. Only `ranges` and `run_index` are read.
pub fn evaluate(
    frame: &MeasurementFrame,
    prev: Option<&MeasurementFrame>,
    layout: &SensorLayout,
    pairing: Pairing,
    thresholds: &Thresholds,
) -> Result<AlarmDecision, DetectorError> {
    let n = layout.sensor_count();
    if frame.ranges.len() != n {
        return Err(DetectorError::WrongWidth {
            expected: n,
            got: frame.ranges.len(),
        });
    }
    let report = residuals_with(frame, layout, pairing);
    let spatial_alarm = report.aggregate > thresholds.spatial;
    let infeasibility_alarm = !report.infeasible.is_empty();

    let temporal: Vec<TemporalVerdict> = match prev {
        Some(p) => temporal_change(p, frame)?
            .into_iter()
            .map(|d| TemporalVerdict {
                alarm: d.abs() > thresholds.temporal,
                delta: Some(d),
            })
            .collect(),
        None => vec![
            TemporalVerdict {
                alarm: false,
                delta: None
            };
            n
        ],
    };
    let fused = spatial_alarm || infeasibility_alarm || temporal.iter().any(|t| t.alarm);
    Ok(AlarmDecision {
        run_index: frame.run_index,
        residuals: report,
        spatial_alarm,
        spatial_threshold: thresholds.spatial,
        temporal,
        temporal_threshold: thresholds.temporal,
        infeasibility_alarm,
        fused,
    })
}

/// Streaming detector for one sensor array. Holds only the previous frame.
#[derive(Debug, Clone)]
pub struct Detector {
    layout: SensorLayout,
    pairing: Pairing,
    thresholds: Thresholds,
    prev: Option<MeasurementFrame>,
}

impl Detector {
    pub fn new(layout: SensorLayout, pairing: Pairing, thresholds: Thresholds) -> Self {
        Self {
            layout,
            pairing,
            thresholds,
            prev: None,
        }
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn layout(&self) -> &SensorLayout {
        &self.layout
    }

    pub fn observe(&mut self, frame: &MeasurementFrame) -> Result<AlarmDecision, DetectorError> {
        let decision = evaluate(
            frame,
            self.prev.as_ref(),
            &self.layout,
            self.pairing,
            &self.thresholds,
        )?;
        self.prev = Some(MeasurementFrame {
            run_index: frame.run_index,
            ranges: frame.ranges.clone(),
            attacked: Vec::new(),
        });
        Ok(decision)
    }

    pub fn reset(&mut self) {
        self.prev = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ObjectState, Scene};
    use proptest::prelude::*;

    fn frame(run: u64, ranges: &[f64]) -> MeasurementFrame {
        MeasurementFrame::new(run, ranges.to_vec()).unwrap()
    }

    fn clean_ranges() -> Vec<f64> {
        Scene::new(SensorLayout::three_sensor(), ObjectState::new(10.0).unwrap()).true_ranges()
    }

    fn limits(spatial: f64) -> Thresholds {
        Thresholds {
            spatial,
            temporal: 0.15,
        }
    }

    fn chi_config(dof: u32, alpha: f64, sigma: f64) -> DetectorConfig {
        DetectorConfig {
            sigma,
            alpha,
            dof,
            threshold_mode: ThresholdMode::ChiSquared,
            temporal_threshold: Some(0.15),
            pairing: Pairing::Reference,
        }
    }

    #[test]
    fn clean_geometry_has_zero_residual() {
        let r = residuals(&frame(0, &clean_ranges()), &SensorLayout::three_sensor());
        assert_eq!(r.pairs.len(), 2);
        for p in &r.pairs {
            assert!(p.value.unwrap().abs() < 1e-12);
        }
        assert!(r.aggregate < 1e-9);
        assert!(r.infeasible.is_empty());
    }

    #[test]
    fn triggering_reference_residuals() {
        let mut ranges = clean_ranges();
        ranges[1] = 0.1;
        let r = residuals(&frame(0, &ranges), &SensorLayout::three_sensor());
        for p in &r.pairs {
            assert!((p.value.unwrap() - -9.9).abs() < 1e-9);
        }
        assert!((r.aggregate - 19.8).abs() < 1e-9);
        assert!((r.signed_sum - -19.8).abs() < 1e-9);
    }

    #[test]
    fn deflection_reference_residuals() {
        let mut ranges = clean_ranges();
        ranges[1] = 100.0;
        let r = residuals(&frame(0, &ranges), &SensorLayout::three_sensor());
        assert!((r.aggregate - 180.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_sensor_is_excluded_and_flagged() {
        let mut ranges = clean_ranges();
        ranges[0] = 0.1;
        let r = residuals(&frame(0, &ranges), &SensorLayout::three_sensor());
        assert_eq!(r.infeasible, vec![0]);
        assert_eq!(r.pairs[0].value, None);
        assert!(r.aggregate < 1e-9);

        let d = evaluate(
            &frame(0, &ranges),
            None,
            &SensorLayout::three_sensor(),
            Pairing::Reference,
            &limits(0.27),
        )
        .unwrap();
        assert!(d.infeasibility_alarm);
        assert!(!d.spatial_alarm);
        assert!(d.fused);
    }

    #[test]
    fn all_pairs_adds_cross_terms() {
        let mut ranges = clean_ranges();
        ranges[2] += 0.5;
        let layout = SensorLayout::three_sensor();
        let r = residuals_with(&frame(0, &ranges), &layout, Pairing::AllPairs);
        assert_eq!(r.pairs.len(), 3);
        assert_eq!((r.pairs[2].first, r.pairs[2].second), (0, 2));
        let s3_hat = project_to_reference(ranges[2], 2.0).unwrap();
        assert!((r.pairs[2].value.unwrap() - (10.0 - s3_hat)).abs() < 1e-9);
    }

    #[test]
    fn chi_squared_threshold_values() {
        let eta = chi_squared_threshold(&chi_config(2, 0.95, 1.0)).unwrap();
        assert!((eta - 2.447_746_830_680_82).abs() < 1e-8);
        let eta = chi_squared_threshold(&chi_config(2, 0.99, 1.0)).unwrap();
        assert!((eta - 3.034_854_258_770_29).abs() < 1e-8);
        assert_eq!(chi_squared_threshold(&chi_config(5, 0.99, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn calibration_arithmetic() {
        let stats = BaselineStats {
            count: 500,
            mean: 0.13,
            std: 0.072,
        };
        assert!((stats.threshold(2.0) - 0.274).abs() < 1e-12);

        let flat: Vec<ResidualReport> = (0..5)
            .map(|_| ResidualReport {
                pairs: vec![],
                aggregate: 0.3,
                signed_sum: 0.3,
                infeasible: vec![],
            })
            .collect();
        for k in [0.5, 2.0, 7.0] {
            assert_eq!(calibrate_threshold(&flat, k).unwrap(), 0.3);
        }
        // 0.1 summed seven times is not 0.7 in binary; the mean must still
        // come back as exactly 0.1.
        let sevens = BaselineStats::from_aggregates(&[0.1; 7]).unwrap();
        assert_eq!((sevens.mean, sevens.std), (0.1, 0.0));
        assert_eq!(
            calibrate_threshold(&flat[..1], 2.0),
            Err(DetectorError::InsufficientBaseline(1))
        );
    }

    #[test]
    fn sample_std_uses_n_minus_one() {
        let s = BaselineStats::from_aggregates(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn temporal_change_cases() {
        let a = frame(3, &[10.0, 10.03, 10.2]);
        let same = frame(4, &[10.0, 10.03, 10.2]);
        assert_eq!(temporal_change(&a, &same).unwrap(), vec![0.0; 3]);

        let hit = frame(4, &[10.0, 0.1, 10.2]);
        let d = temporal_change(&a, &hit).unwrap();
        assert!((d[1] - -9.93).abs() < 1e-12);

        assert_eq!(
            temporal_change(&a, &frame(6, &[10.0, 10.0, 10.0])),
            Err(DetectorError::FrameGap { prev: 3, curr: 6 })
        );
    }

    #[test]
    fn evaluate_examples() {
        let layout = SensorLayout::three_sensor();
        let clean = evaluate(&frame(0, &clean_ranges()), None, &layout, Pairing::Reference, &limits(0.27)).unwrap();
        assert!(!clean.fused);
        assert!(clean.temporal.iter().all(|t| t.delta.is_none()));

        let mut trig = clean_ranges();
        trig[1] = 0.1;
        let prev = frame(0, &clean_ranges());
        let d = evaluate(&frame(1, &trig), Some(&prev), &layout, Pairing::Reference, &limits(0.27)).unwrap();
        assert!(d.spatial_alarm);
        assert!(d.temporal[1].alarm);
        assert!(!d.temporal[0].alarm && !d.temporal[2].alarm);
        assert!(!d.infeasibility_alarm);
        assert!(d.fused);
    }

    #[test]
    fn detector_stream_flags_onset_and_expiry() {
        let mut det = Detector::new(SensorLayout::three_sensor(), Pairing::Reference, limits(0.27));
        let clean = clean_ranges();
        let mut trig = clean.clone();
        trig[1] = 0.1;
        let seq = [&clean, &clean, &trig, &trig, &clean];
        let temporal: Vec<bool> = seq
            .iter()
            .enumerate()
            .map(|(i, r)| det.observe(&frame(i as u64, r)).unwrap().temporal[1].alarm)
            .collect();
        assert_eq!(temporal, vec![false, false, true, false, true]);
        assert!(matches!(
            det.observe(&frame(9, &clean)),
            Err(DetectorError::FrameGap { .. })
        ));
        det.reset();
        assert!(det.observe(&frame(9, &clean)).is_ok());
    }

    #[test]
    fn temporal_bound_derivation() {
        let frames = vec![
            frame(0, &[1.0, 1.0]),
            frame(1, &[1.05, 0.98]),
            frame(2, &[1.0, 1.0]),
        ];
        assert!((temporal_bound_from_baseline(&frames).unwrap() - 0.075).abs() < 1e-12);
        let still = vec![frame(0, &[1.0, 1.0]), frame(1, &[1.0, 1.0])];
        assert_eq!(temporal_bound_from_baseline(&still).unwrap(), MIN_TEMPORAL_BOUND);
    }

    #[test]
    fn config_validation() {
        let mut c = chi_config(2, 0.95, 1.0);
        c.validate().unwrap();
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        let mut c = chi_config(0, 0.95, 1.0);
        assert!(c.validate().is_err());
        c.dof = 1;
        c.threshold_mode = ThresholdMode::Calibrated { k: 0.0 };
        assert!(c.validate().is_err());
        c.threshold_mode = ThresholdMode::Calibrated { k: 1.0 };
        c.temporal_threshold = Some(0.0);
        assert!(c.validate().is_err());
    }

    proptest! {
        #[test]
        fn aggregate_ignores_residual_sign(vals in prop::collection::vec(-50.0f64..50.0, 1..8)) {
            let mk = |sign: f64| ResidualReport {
                pairs: vals.iter().enumerate().map(|(i, v)| PairResidual { first: 0, second: i + 1, value: Some(sign * v) }).collect(),
                aggregate: vals.iter().map(|v| (sign * v).abs()).sum(),
                signed_sum: 0.0,
                infeasible: vec![],
            };
            prop_assert_eq!(mk(1.0).aggregate, mk(-1.0).aggregate);
        }

        #[test]
        fn mirrored_frame_gives_equal_aggregate(e2 in 0.0f64..0.5) {
            // Shifting the reference up by x vs down by x about exact
            // geometry flips every residual's sign but keeps Σ|r|.
            let layout = SensorLayout::three_sensor();
            let base = clean_ranges();
            let up = frame(0, &[base[0], base[1] + e2, base[2]]);
            let down = frame(0, &[base[0], base[1] - e2, base[2]]);
            let a = residuals(&up, &layout).aggregate;
            let b = residuals(&down, &layout).aggregate;
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn chi_threshold_monotone(dof in 1u32..30, alpha in 0.05f64..0.95, da in 0.001f64..0.04, sigma in 0.01f64..5.0) {
            let base = chi_squared_threshold(&chi_config(dof, alpha, sigma)).unwrap();
            prop_assert!(chi_squared_threshold(&chi_config(dof, alpha + da, sigma)).unwrap() > base);
            prop_assert!(chi_squared_threshold(&chi_config(dof + 1, alpha, sigma)).unwrap() > base);
            prop_assert!(chi_squared_threshold(&chi_config(dof, alpha, sigma * 1.5)).unwrap() > base);
        }

        #[test]
        fn threshold_linear_in_sigma(dof in 1u32..10, alpha in 0.5f64..0.999, sigma in 0.0f64..10.0) {
            let unit = chi_squared_threshold(&chi_config(dof, alpha, 1.0)).unwrap();
            let scaled = chi_squared_threshold(&chi_config(dof, alpha, sigma)).unwrap();
            prop_assert_eq!(scaled, sigma * unit);
        }

        #[test]
        fn decision_ignores_ground_truth(ranges in prop::collection::vec(0.0f64..120.0, 3), mask in prop::collection::vec(any::<bool>(), 3), spatial in 0.01f64..5.0) {
            let layout = SensorLayout::three_sensor();
            let prev = frame(0, &clean_ranges());
            let plain = frame(1, &ranges);
            let mut marked = plain.clone();
            marked.attacked = mask;
            let a = evaluate(&plain, Some(&prev), &layout, Pairing::Reference, &limits(spatial)).unwrap();
            let b = evaluate(&marked, Some(&prev), &layout, Pairing::Reference, &limits(spatial)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
