mod common;

use common::*;
use proptest::prelude::*;
use tofguard::attacks::AttackKind;
use tofguard::detector::Detector;
use tofguard::geometry::ObjectState;
use tofguard::harness::{resolve_thresholds, run_scenario, sweep, SeedPolicy, SweepParam};
use tofguard::io;
use tofguard::sensing::NoiseModel;

#[test]
fn reported_rates_match_a_scan_of_the_trace() {
    for name in ["paper_table1.cfg", "triggering.cfg", "deflection.cfg", "chi_squared_gaussian.cfg"] {
        let spec = io::parse_scenario(&scenario_path(name)).unwrap().spec;
        let out = run_scenario(&spec).unwrap();
        let (fpr, det) = rates_from_trace(&out.trace);
        assert_eq!(out.metrics.false_positive_rate, fpr, "{name}");
        assert_eq!(out.metrics.detection_rate, det, "{name}");
        assert_eq!(out.metrics.attacked_runs + out.metrics.clean_runs, spec.runs);
    }
}

#[test]
fn rendered_scenarios_parse_back_unchanged() {
    for name in ["paper_table1.cfg", "triggering.cfg", "deflection.cfg", "chi_squared_gaussian.cfg"] {
        let spec = io::parse_scenario(&scenario_path(name)).unwrap().spec;
        let text = io::render_scenario(&spec, None);
        let back = io::parse_scenario_str(&text, name).unwrap().spec;
        assert_eq!(back, spec, "{name}");
    }
}

#[test]
fn streaming_detector_reproduces_the_harness() {
    let spec = io::parse_scenario(&scenario_path("triggering.cfg")).unwrap().spec;
    let out = run_scenario(&spec).unwrap();
    let mut det = Detector::new(spec.scene.layout.clone(), spec.detector.pairing, out.resolved.thresholds);
    for row in &out.trace {
        assert_eq!(det.observe(&row.frame).unwrap(), row.decision);
    }
}

#[test]
fn temporal_rule_fires_at_onset_and_expiry_only() {
    let mut spec = three_sensor_spec(uniform(), 300, 5);
    spec.schedule = single_attack(1, AttackKind::triggering().with_spoof_range(5.0), 100, Some(50));
    let out = run_scenario(&spec).unwrap();
    let temporal = |run: usize| out.trace[run].decision.temporal[1].alarm;
    assert!(temporal(100), "onset");
    assert!(temporal(150), "expiry");
    for run in (1..300).filter(|r| ![100, 150].contains(r)) {
        assert!(!temporal(run), "run {run}");
    }
}

#[test]
fn common_seeds_pair_points_and_per_point_seeds_do_not() {
    let spec = three_sensor_spec(uniform(), 200, 9);
    let same = [2.0, 2.0];
    let common = sweep(&spec, SweepParam::K, &same, SeedPolicy::Common).unwrap();
    assert_eq!(common[0], common[1]);
    let split = sweep(&spec, SweepParam::K, &same, SeedPolicy::PerPoint).unwrap();
    assert_ne!(split[0].residual_trace, split[1].residual_trace);
}

#[test]
fn calibrated_threshold_grows_with_noise_width() {
    let spec = three_sensor_spec(NoiseModel::Uniform { lo: 0.0, hi: 0.01 }, 200, 4);
    let widths = [0.01, 0.05, 0.1, 0.2];
    let t: Vec<f64> = sweep(&spec, SweepParam::NoiseWidth, &widths, SeedPolicy::Common)
        .unwrap()
        .iter()
        .map(|m| m.threshold_used)
        .collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]), "{t:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// An overwrite far enough from the truth is always flagged, whichever
    /// sensor it hits.
    #[test]
    fn distant_overwrites_are_always_flagged(
        sensor in 0usize..3,
        spoof in 0.0f64..200.0,
        seed in any::<u64>(),
    ) {
        let mut spec = three_sensor_spec(uniform(), 40, seed);
        spec.calibration_runs = 200;
        let thresholds = resolve_thresholds(&spec).unwrap().thresholds;
        let truth = spec.scene.true_range(sensor);
        prop_assume!((spoof - truth).abs() > thresholds.spatial + 2.0 * 0.1);

        spec.schedule = single_attack(sensor, AttackKind::Triggering { spoof_range: spoof }, 10, Some(20));
        let out = run_scenario(&spec).unwrap();
        for row in &out.trace[10..30] {
            prop_assert!(row.decision.fused, "run {} spoof {spoof} sensor {sensor}", row.frame.run_index);
        }
    }

    #[test]
    fn noiseless_scenes_never_alarm(d in 2.5f64..500.0, seed in any::<u64>()) {
        let mut spec = three_sensor_spec(NoiseModel::None, 50, seed);
        spec.scene.object = ObjectState::new(d).unwrap();
        let out = run_scenario(&spec).unwrap();
        prop_assert_eq!(out.metrics.false_positive_rate, Some(0.0));
    }
}
