// Three collinear sensors look at one object. Each corroborating range is
// projected onto the reference axis and compared with the reference reading.

use tofguard::detector::residuals;
use tofguard::geometry::{ObjectState, Scene, SensorLayout};
use tofguard::sensing::MeasurementFrame;

pub fn main() {
    let layout = SensorLayout::three_sensor();
    let scene = Scene::new(layout.clone(), ObjectState::new(10.0).unwrap());

    println!("sensor  offset  baseline  true range");
    for (i, range) in scene.true_ranges().iter().enumerate() {
        println!("{i:>6}  {:>6}  {:>8}  {range:.6}", layout.offsets()[i], layout.baseline(i));
    }

    let exact = MeasurementFrame::new(0, scene.true_ranges()).unwrap();
    println!("aggregate residual, exact ranges:   {:.3e}", residuals(&exact, &layout).aggregate);

    // The same readings rounded to one decimal place.
    let rounded = MeasurementFrame::new(0, vec![10.05, 10.0, 10.2]).unwrap();
    let report = residuals(&rounded, &layout);
    for p in &report.pairs {
        println!("  residual {}-{}: {:+.6}", p.first, p.second, p.value.unwrap());
    }
    println!("aggregate residual, rounded ranges: {:.6}", report.aggregate);

    // A range shorter than the baseline cannot come from any point on the axis.
    let spoofed = MeasurementFrame::new(0, vec![0.1, 10.0, 10.2]).unwrap();
    let report = residuals(&spoofed, &layout);
    println!("sensor 0 reads 0.1: infeasible sensors {:?}", report.infeasible);
}
