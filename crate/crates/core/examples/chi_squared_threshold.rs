// The spatial threshold from the chi-squared rule, eta = sigma * sqrt(q),
// against the calibrated mean + k * std alternative.

use tofguard::attacks::AttackSchedule;
use tofguard::detector::{chi_squared_quantile, chi_squared_threshold, DetectorConfig, ThresholdMode};
use tofguard::geometry::{ObjectState, Scene, SensorLayout};
use tofguard::harness::{resolve_thresholds, ScenarioSpec};
use tofguard::sensing::NoiseModel;

pub fn main() {
    println!("dof  alpha  quantile");
    for dof in [1, 2, 3] {
        for alpha in [0.9, 0.95, 0.99] {
            println!("{dof:>3}  {alpha:<5}  {:.5}", chi_squared_quantile(dof, alpha).unwrap());
        }
    }

    let layout = SensorLayout::three_sensor();
    let noise = NoiseModel::Uniform { lo: 0.0, hi: 0.1 };
    let mut config = DetectorConfig::defaults_for(&layout, &noise);
    config.threshold_mode = ThresholdMode::ChiSquared;
    println!("\nsigma of U(0, 0.1) = {:.5}", config.sigma);
    for sigma in [0.01, config.sigma, 0.05] {
        config.sigma = sigma;
        println!("eta(sigma = {sigma:.5}) = {:.5}", chi_squared_threshold(&config).unwrap());
    }

    let spec = ScenarioSpec {
        scene: Scene::new(layout.clone(), ObjectState::new(10.0).unwrap()),
        detector: DetectorConfig::defaults_for(&layout, &noise),
        noise,
        schedule: AttackSchedule::empty(),
        runs: 1,
        seed: 1,
        calibration_runs: 2000,
    };
    let resolved = resolve_thresholds(&spec).unwrap();
    let b = resolved.baseline.unwrap();
    println!(
        "\ncalibrated over {} runs: mean {:.4} + 2 * std {:.4} = {:.4}",
        b.count, b.mean, b.std, resolved.thresholds.spatial
    );
    println!("chi-squared rule for the same noise: {:.4}", resolved.chi_squared);
}
