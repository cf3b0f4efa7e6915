//! Spatial-temporal spoofing detection for time-of-flight range sensor arrays.
//!
//! Several range sensors on a flat baseline look at the same object. Each
//! corroborating sensor's range is projected onto the reference sensor's
//! axis and compared with the reference reading (spatial stage), and every
//! sensor's frame-to-frame change is checked against a plausibility bound
//! (temporal stage). A seeded simulator injects triggering (phantom near
//! object) and deflection (hidden object) spoofs and scores the detector.
//!
//! | module | role |
//! |--------|------|
//! | [`geometry`] | layout, true ranges, projection onto the reference axis |
//! | [`sensing`] | noisy measurement frames from reproducible streams |
//! | [`attacks`] | overwrite-style spoof injection on a schedule |
//! | [`detector`] | residuals, thresholds, temporal check, fused alarm |
//! | [`harness`] | calibration + evaluation scenarios, sweeps, metrics |
//! | [`io`] | scenario files, CSV traces, command implementations |
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

pub mod attacks;
pub mod detector;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod sensing;

pub use attacks::{inject, AttackEntry, AttackKind, AttackSchedule};
pub use detector::{
    calibrate_threshold, chi_squared_threshold, evaluate, residuals, temporal_change,
    AlarmDecision, Detector, DetectorConfig, Pairing, ResidualReport, ThresholdMode, Thresholds,
};
pub use geometry::{project_to_reference, true_range, ObjectState, Scene, SensorLayout};
pub use harness::{run_scenario, sweep, RunMetrics, ScenarioSpec, SeedPolicy, SweepParam};
pub use sensing::{measure, MeasurementFrame, NoiseModel, RngStreams};
