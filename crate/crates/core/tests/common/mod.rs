//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use tofguard::attacks::{AttackEntry, AttackKind, AttackSchedule};
use tofguard::detector::DetectorConfig;
use tofguard::geometry::{ObjectState, Scene, SensorLayout};
use tofguard::harness::{ScenarioSpec, TraceRow};
use tofguard::sensing::NoiseModel;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

pub fn uniform() -> NoiseModel {
    NoiseModel::Uniform { lo: 0.0, hi: 0.1 }
}

pub fn three_sensor_spec(noise: NoiseModel, runs: u64, seed: u64) -> ScenarioSpec {
    let scene = Scene::new(SensorLayout::three_sensor(), ObjectState::new(10.0).unwrap());
    ScenarioSpec {
        detector: DetectorConfig::defaults_for(&scene.layout, &noise),
        scene,
        noise,
        schedule: AttackSchedule::empty(),
        runs,
        seed,
        calibration_runs: runs.max(2),
    }
}

pub fn single_attack(sensor: usize, kind: AttackKind, onset: u64, duration: Option<u64>) -> AttackSchedule {
    AttackSchedule::new(vec![AttackEntry {
        sensor,
        kind,
        onset_run: onset,
        duration_runs: duration,
    }])
    .unwrap()
}

/// Gamma(k/2) for integer k by the half-integer recurrence, independent of
/// any Lanczos or Stirling approximation.
fn gamma_half(k: u32) -> f64 {
    let (mut g, mut x) = if k.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    while x < f64::from(k) / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Chi-squared CDF by composite Simpson quadrature of the density. For
/// `k = 1` the integrable singularity at 0 is removed with `x = t^2`.
pub fn chi2_cdf_quadrature(k: u32, x: f64) -> f64 {
    let norm = 2f64.powf(f64::from(k) / 2.0) * gamma_half(k);
    let panels = 20_000;
    if k == 1 {
        let upper = x.sqrt();
        let f = |t: f64| 2.0 * (-t * t / 2.0).exp() / norm;
        simpson(f, 0.0, upper, panels)
    } else {
        let half = f64::from(k) / 2.0 - 1.0;
        let f = |t: f64| {
            if t == 0.0 {
                if half == 0.0 { 1.0 / norm } else { 0.0 }
            } else {
                t.powf(half) * (-t / 2.0).exp() / norm
            }
        };
        simpson(f, 0.0, x, panels)
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Quantile by bisection on the quadrature CDF.
pub fn chi2_quantile_quadrature(k: u32, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 200.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf_quadrature(k, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Recomputes (false positive rate, detection rate) by scanning the trace,
/// independently of the harness's scoring code.
pub fn rates_from_trace(trace: &[TraceRow]) -> (Option<f64>, Option<f64>) {
    let clean: Vec<&TraceRow> = trace.iter().filter(|r| !r.frame.attacked.contains(&true)).collect();
    let hit: Vec<&TraceRow> = trace.iter().filter(|r| r.frame.attacked.contains(&true)).collect();
    let frac = |rows: &[&TraceRow]| {
        (!rows.is_empty()).then(|| {
            let alarms = rows.iter().filter(|r| r.decision.fused).count();
            alarms as f64 / rows.len() as f64
        })
    };
    (frac(&clean), frac(&hit))
}
