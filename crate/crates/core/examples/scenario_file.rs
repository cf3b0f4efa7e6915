// Scenario files end to end: parse, simulate, write the CSV outputs, then
// replay the trace through the detector from the echoed configuration.

use std::path::Path;

use tofguard::io;

pub fn main() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/chi_squared_gaussian.cfg");
    let dir = std::env::temp_dir().join(format!("tofguard-example-{}", std::process::id()));

    let (spec, outcome) = io::simulate(&config, &dir, None).unwrap();
    println!("simulated {} runs into {}", spec.runs, dir.display());
    for file in ["trace.csv", "metrics.csv", "scenario.echo.cfg"] {
        let bytes = std::fs::metadata(dir.join(file)).unwrap().len();
        println!("  {file:<18} {bytes} bytes");
    }
    println!(
        "chi-squared threshold {:.4}, false positive rate {:.4}",
        outcome.metrics.threshold_used,
        outcome.metrics.false_positive_rate.unwrap()
    );

    let mut replay = Vec::new();
    let decisions = io::detect(&dir.join("scenario.echo.cfg"), &dir.join("trace.csv"), &mut replay).unwrap();
    let same = decisions
        .iter()
        .zip(&outcome.trace)
        .all(|(d, row)| *d == row.decision);
    println!("replayed {} frames, decisions identical: {same}", decisions.len());

    std::fs::remove_dir_all(&dir).unwrap();
}
