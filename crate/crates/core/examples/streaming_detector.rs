// Frame-by-frame use of the detector with fixed thresholds, as it would sit
// behind a live sensor bus.

use tofguard::detector::{Detector, Pairing, Thresholds};
use tofguard::geometry::SensorLayout;
use tofguard::sensing::MeasurementFrame;

pub fn main() {
    let thresholds = Thresholds {
        spatial: 0.14,
        temporal: 0.15,
    };
    let mut detector = Detector::new(SensorLayout::three_sensor(), Pairing::Reference, thresholds);

    let frames = [
        [10.07, 10.03, 10.22],
        [10.06, 10.04, 10.20],
        [10.08, 10.02, 10.23],
        // Sensor 1 jumps to a spoofed 0.1.
        [10.07, 0.1, 10.21],
        [10.05, 0.1, 10.22],
        // And back.
        [10.06, 10.03, 10.21],
    ];
    for (run, ranges) in frames.iter().enumerate() {
        let frame = MeasurementFrame::new(run as u64, ranges.to_vec()).unwrap();
        let d = detector.observe(&frame).unwrap();
        let steps: Vec<usize> = (0..3).filter(|&i| d.temporal[i].alarm).collect();
        println!(
            "run {run}  aggregate {:>7.3}  spatial {}  step alarms {steps:?}  fused {}",
            d.residuals.aggregate, d.spatial_alarm, d.fused
        );
    }

    // A gap in the stream drops the temporal reference.
    detector.reset();
    let frame = MeasurementFrame::new(10, vec![10.05, 10.03, 10.2]).unwrap();
    let d = detector.observe(&frame).unwrap();
    println!("after reset: step change {:?}", d.temporal[1].delta);
}
