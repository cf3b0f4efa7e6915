//! Flat-baseline sensor array geometry.
//!
//! All sensors sit on a straight lateral baseline and look straight ahead.
//! The object is assumed to lie on the boresight of the reference sensor, so
//! a sensor at lateral offset `a` sees the object at the hypotenuse
//! `sqrt(d^2 + a^2)` and any measured range can be projected back onto the
//! reference axis by `sqrt(s^2 - a^2)`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("layout needs at least 2 sensors, got {0}")]
    TooFewSensors(usize),
    #[error("reference sensor {reference} out of range for {count} sensors")]
    BadReference { reference: usize, count: usize },
    #[error("reference sensor offset must be exactly 0, got {0}")]
    ReferenceNotAtOrigin(f64),
    #[error("sensor {0} has a non-finite offset")]
    NonFiniteOffset(usize),
    #[error("sensors {0} and {1} share the same offset")]
    DuplicateOffset(usize, usize),
    #[error("object distance must be finite and > 0, got {0}")]
    BadDistance(f64),
    #[error("literal range override has {got} entries, layout has {expected} sensors")]
    OverrideLength { expected: usize, got: usize },
    #[error("literal range override entry {0} must be finite and >= 0")]
    BadOverride(usize),
    #[error("range {range} is shorter than baseline separation {baseline}")]
    GeometricallyInfeasible { range: f64, baseline: f64 },
}

/// Index of a sensor within a [`SensorLayout`].
pub type SensorId = usize;

/// Sensors on a flat lateral baseline, measured from the reference sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorLayout {
    reference: SensorId,
    offsets: Vec<f64>,
}

impl SensorLayout {
    pub fn new(offsets: Vec<f64>, reference: SensorId) -> Result<Self, GeometryError> {
        if offsets.len() < 2 {
            return Err(GeometryError::TooFewSensors(offsets.len()));
        }
        if reference >= offsets.len() {
            return Err(GeometryError::BadReference {
                reference,
                count: offsets.len(),
            });
        }
        if let Some(i) = offsets.iter().position(|o| !o.is_finite()) {
            return Err(GeometryError::NonFiniteOffset(i));
        }
        if offsets[reference] != 0.0 {
            return Err(GeometryError::ReferenceNotAtOrigin(offsets[reference]));
        }
        for i in 0..offsets.len() {
            for j in (i + 1)..offsets.len() {
                if offsets[i] == offsets[j] {
                    return Err(GeometryError::DuplicateOffset(i, j));
                }
            }
        }
        Ok(Self { reference, offsets })
    }

    /// The three-sensor array used throughout the examples: offsets 1 m and
    /// 2 m either side of a central reference sensor at index 1.
    pub fn three_sensor() -> Self {
        Self::new(vec![1.0, 0.0, 2.0], 1).expect("static layout is valid")
    }

    pub fn sensor_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn reference(&self) -> SensorId {
        self.reference
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Unsigned baseline separation between `sensor` and the reference.
    pub fn baseline(&self, sensor: SensorId) -> f64 {
        self.offsets[sensor].abs()
    }

    /// Non-reference sensors in index order.
    pub fn corroborators(&self) -> impl Iterator<Item = SensorId> + '_ {
        (0..self.offsets.len()).filter(move |&i| i != self.reference)
    }
}

/// A single static object on the reference boresight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectState {
    true_distance: f64,
}

impl ObjectState {
    pub fn new(true_distance: f64) -> Result<Self, GeometryError> {
        if !(true_distance.is_finite() && true_distance > 0.0) {
            return Err(GeometryError::BadDistance(true_distance));
        }
        Ok(Self { true_distance })
    }

    pub fn true_distance(&self) -> f64 {
        self.true_distance
    }
}

/// Range from `sensor` to the object: `sqrt(d^2 + a^2)`, exactly `d` for the
/// reference sensor.
pub fn true_range(layout: &SensorLayout, object: &ObjectState, sensor: SensorId) -> f64 {
    let d = object.true_distance;
    let a = layout.baseline(sensor);
    if a == 0.0 {
        d
    } else {
        d.hypot(a)
    }
}

/// Projects a range measured at baseline separation `a` onto the reference
/// axis, `sqrt(s^2 - a^2)`.
///
/// A range shorter than the baseline has no real solution and is reported as
/// [`GeometryError::GeometricallyInfeasible`].
pub fn project_to_reference(s: f64, a: f64) -> Result<f64, GeometryError> {
    if s < a {
        return Err(GeometryError::GeometricallyInfeasible {
            range: s,
            baseline: a,
        });
    }
    if a == 0.0 {
        return Ok(s);
    }
    // (s - a)(s + a) keeps precision when s is close to a.
    Ok(((s - a) * (s + a)).sqrt())
}

/// Layout plus object, with an optional literal per-sensor range table that
/// replaces the Pythagorean ranges (for replaying rounded published ranges).
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub layout: SensorLayout,
    pub object: ObjectState,
    range_override: Option<Vec<f64>>,
}

impl Scene {
    pub fn new(layout: SensorLayout, object: ObjectState) -> Self {
        Self {
            layout,
            object,
            range_override: None,
        }
    }

    pub fn with_literal_ranges(mut self, ranges: Vec<f64>) -> Result<Self, GeometryError> {
        if ranges.len() != self.layout.sensor_count() {
            return Err(GeometryError::OverrideLength {
                expected: self.layout.sensor_count(),
                got: ranges.len(),
            });
        }
        if let Some(i) = ranges.iter().position(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(GeometryError::BadOverride(i));
        }
        self.range_override = Some(ranges);
        Ok(self)
    }

    pub fn literal_ranges(&self) -> Option<&[f64]> {
        self.range_override.as_deref()
    }

    pub fn true_range(&self, sensor: SensorId) -> f64 {
        match &self.range_override {
            Some(r) => r[sensor],
            None => true_range(&self.layout, &self.object, sensor),
        }
    }

    pub fn true_ranges(&self) -> Vec<f64> {
        (0..self.layout.sensor_count())
            .map(|i| self.true_range(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn obj(d: f64) -> ObjectState {
        ObjectState::new(d).unwrap()
    }

    #[test]
    fn three_sensor_true_ranges() {
        let layout = SensorLayout::three_sensor();
        let o = obj(10.0);
        assert_eq!(true_range(&layout, &o, 1), 10.0);
        assert_relative_eq!(true_range(&layout, &o, 0), 10.049_875_621_120_89, epsilon = 1e-12);
        assert_relative_eq!(true_range(&layout, &o, 2), 10.198_039_027_185_57, epsilon = 1e-12);
        assert!((true_range(&layout, &o, 0) - 10.05).abs() < 1e-3);
        assert!((true_range(&layout, &o, 2) - 10.2).abs() < 2e-3);
    }

    #[test]
    fn projection_examples() {
        // mpmath, 30 digits: sqrt(10.05^2 - 1) = 10.0001249992187597...
        assert_relative_eq!(
            project_to_reference(10.05, 1.0).unwrap(),
            10.000_124_999_218_76,
            epsilon = 1e-12
        );
        assert_eq!(project_to_reference(10.0, 0.0).unwrap(), 10.0);
        assert!(matches!(
            project_to_reference(0.1, 1.0),
            Err(GeometryError::GeometricallyInfeasible { .. })
        ));
        assert_eq!(project_to_reference(1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn layout_validation() {
        assert!(matches!(
            SensorLayout::new(vec![0.0], 0),
            Err(GeometryError::TooFewSensors(1))
        ));
        assert!(matches!(
            SensorLayout::new(vec![1.0, 0.0], 0),
            Err(GeometryError::ReferenceNotAtOrigin(_))
        ));
        assert!(matches!(
            SensorLayout::new(vec![1.0, 0.0, 1.0], 1),
            Err(GeometryError::DuplicateOffset(0, 2))
        ));
        assert!(matches!(
            SensorLayout::new(vec![f64::NAN, 0.0], 1),
            Err(GeometryError::NonFiniteOffset(0))
        ));
        assert!(matches!(
            SensorLayout::new(vec![1.0, 0.0], 5),
            Err(GeometryError::BadReference { .. })
        ));
        assert!(ObjectState::new(0.0).is_err());
        assert!(ObjectState::new(f64::INFINITY).is_err());
        // -1 and +1 are distinct positions with the same baseline.
        assert!(SensorLayout::new(vec![-1.0, 0.0, 1.0], 1).is_ok());
    }

    #[test]
    fn literal_override() {
        let scene = Scene::new(SensorLayout::three_sensor(), obj(10.0))
            .with_literal_ranges(vec![10.05, 10.0, 10.2])
            .unwrap();
        assert_eq!(scene.true_ranges(), vec![10.05, 10.0, 10.2]);
        assert!(Scene::new(SensorLayout::three_sensor(), obj(10.0))
            .with_literal_ranges(vec![1.0])
            .is_err());
    }

    proptest! {
        #[test]
        fn round_trip(d in 1e-3f64..1e4, ratio in 0.0f64..20.0) {
            // Past a ~ 50 d the rounded range no longer determines d to
            // 1e-12, whatever the projection formula.
            let a = ratio * d;
            let layout = SensorLayout::new(vec![0.0, a.max(1e-9)], 0).unwrap();
            let o = obj(d);
            let s = true_range(&layout, &o, 1);
            let back = project_to_reference(s, layout.baseline(1)).unwrap();
            prop_assert!(((back - d) / d).abs() <= 1e-12, "d={d} a={a} back={back}");
        }

        #[test]
        fn true_range_monotone(d in 0.1f64..1e3, a in 0.0f64..100.0, dd in 1e-3f64..10.0, da in 1e-3f64..10.0) {
            // Sensor 0 is the reference; sensor 1 sits at offset `a` (or at
            // the reference position itself when `a` is 0).
            let at = |d: f64, a: f64| match SensorLayout::new(vec![0.0, a], 0) {
                Ok(layout) => true_range(&layout, &obj(d), 1),
                Err(_) => true_range(&SensorLayout::three_sensor(), &obj(d), 1),
            };
            prop_assert!(at(d + dd, a) > at(d, a));
            prop_assert!(at(d, a + da) > at(d, a));
        }

        #[test]
        fn projection_never_exceeds_range(s in 0.0f64..1e4, a in 0.0f64..1e4) {
            if let Ok(p) = project_to_reference(s, a) {
                prop_assert!(p <= s);
            } else {
                prop_assert!(s < a);
            }
        }
    }
}
