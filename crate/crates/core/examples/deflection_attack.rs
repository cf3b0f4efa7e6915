// A deflection attack pushes the reference sensor out to 100 from run 150
// onward. Both corroborating sensors disagree by about 90 each.

use std::path::Path;

use tofguard::harness::run_scenario;
use tofguard::io::parse_scenario;

pub fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/deflection.cfg");
    let spec = parse_scenario(&path).unwrap().spec;
    let out = run_scenario(&spec).unwrap();

    for run in [0, 149, 150, 151, 499] {
        let row = &out.trace[run];
        println!(
            "run {run:>3}  ranges {:?}  aggregate {:>8.3}  fused {}",
            row.frame.ranges.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            row.decision.residuals.aggregate,
            row.decision.fused,
        );
    }
    let m = &out.metrics;
    println!("detection rate {:?}, latency {:?}", m.detection_rate, m.detection_latency);
}
