// Detection rate as a triggering spoof on the reference sensor approaches the
// true distance, and false positive rate against the calibration multiplier.

use tofguard::attacks::{AttackEntry, AttackKind, AttackSchedule};
use tofguard::detector::DetectorConfig;
use tofguard::geometry::{ObjectState, Scene, SensorLayout};
use tofguard::harness::{sweep, ScenarioSpec, SeedPolicy, SweepParam};
use tofguard::sensing::NoiseModel;

pub fn main() {
    let scene = Scene::new(SensorLayout::three_sensor(), ObjectState::new(10.0).unwrap());
    let noise = NoiseModel::Uniform { lo: 0.0, hi: 0.1 };
    let mut spec = ScenarioSpec {
        detector: DetectorConfig::defaults_for(&scene.layout, &noise),
        scene,
        noise,
        schedule: AttackSchedule::empty(),
        runs: 1000,
        seed: 7,
        calibration_runs: 1000,
    };

    let ks = [1.0, 1.5, 2.0, 2.5, 3.0];
    let results = sweep(&spec, SweepParam::K, &ks, SeedPolicy::Common).unwrap();
    println!("    k  false positive rate");
    for (k, m) in ks.iter().zip(&results) {
        println!("{k:>5}  {:.4}", m.false_positive_rate.unwrap());
    }

    spec.schedule = AttackSchedule::new(vec![AttackEntry {
        sensor: 1,
        kind: AttackKind::triggering(),
        onset_run: 200,
        duration_runs: Some(600),
    }])
    .unwrap();
    let spoofs = [0.1, 5.0, 9.0, 9.5, 9.8, 9.9, 9.95, 10.0, 10.1];
    let results = sweep(&spec, SweepParam::SpoofRange, &spoofs, SeedPolicy::Common).unwrap();
    println!("\nspoof  detection rate");
    for (s, m) in spoofs.iter().zip(&results) {
        println!("{s:>5}  {:.4}", m.detection_rate.unwrap());
    }
}
