// Attack-free Monte Carlo run: the false positive rate of the calibrated
// detector under uniform range noise.

use tofguard::attacks::AttackSchedule;
use tofguard::detector::DetectorConfig;
use tofguard::geometry::{ObjectState, Scene, SensorLayout};
use tofguard::harness::{run_scenario, ScenarioSpec};
use tofguard::sensing::NoiseModel;

pub fn main() {
    let scene = Scene::new(SensorLayout::three_sensor(), ObjectState::new(10.0).unwrap());
    let noise = NoiseModel::Uniform { lo: 0.0, hi: 0.1 };
    let spec = ScenarioSpec {
        detector: DetectorConfig::defaults_for(&scene.layout, &noise),
        scene,
        noise,
        schedule: AttackSchedule::empty(),
        runs: 5000,
        seed: 20230601,
        calibration_runs: 5000,
    };
    let out = run_scenario(&spec).unwrap();
    let m = &out.metrics;
    let b = m.baseline.unwrap();
    println!("baseline mean {:.4}, std {:.4}", b.mean, b.std);
    println!("spatial threshold {:.4}, temporal bound {:.4}", m.threshold_used, m.temporal_threshold_used);
    println!("false positive rate {:.4} over {} runs", m.false_positive_rate.unwrap(), m.runs);

    let spatial = out.trace.iter().filter(|r| r.decision.spatial_alarm).count();
    let temporal = out
        .trace
        .iter()
        .filter(|r| r.decision.temporal.iter().any(|t| t.alarm))
        .count();
    println!("  spatial alarms {spatial}, temporal alarms {temporal}");
}
