// Triggering attacks pull one sensor's reading down to 0.1. On the reference
// sensor the residuals blow up; on the others the reading is shorter than
// the baseline and is flagged as geometrically infeasible.

use std::path::Path;

use tofguard::harness::run_scenario;
use tofguard::io::parse_scenario;

pub fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/triggering.cfg");
    let spec = parse_scenario(&path).unwrap().spec;
    let out = run_scenario(&spec).unwrap();

    for (entry, latency) in spec.schedule.entries().iter().zip(&out.metrics.detection_latency) {
        let onset = &out.trace[entry.onset_run as usize].decision;
        println!(
            "sensor {} from run {}: aggregate {:.3}, infeasible {}, step {:+.3}, latency {latency}",
            entry.sensor,
            entry.onset_run,
            onset.residuals.aggregate,
            onset.infeasibility_alarm,
            onset.temporal[entry.sensor].delta.unwrap(),
        );
    }
    let m = &out.metrics;
    println!("detection rate {:?}", m.detection_rate);
    println!("false positive rate {:.4} (step alarms at window expiry count here)", m.false_positive_rate.unwrap());
}
