//! Spoofing attacks as measurement overwrites.
//!
//! A triggering attack makes a phantom object appear close to the sensor; a
//! deflection attack hides the real object so the range reads as very far.
//! Both replace the measured range outright.

use thiserror::Error;

use crate::geometry::{Scene, SensorId};
use crate::sensing::MeasurementFrame;

pub const DEFAULT_TRIGGERING_RANGE: f64 = 0.1;
pub const DEFAULT_DEFLECTION_RANGE: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttackError {
    #[error("attack entries {first} and {second} both target sensor {sensor} at run {run}")]
    ScheduleConflict {
        sensor: SensorId,
        run: u64,
        first: usize,
        second: usize,
    },
    #[error("attack entry {entry} targets sensor {sensor}, layout has {count} sensors")]
    UnknownSensor {
        entry: usize,
        sensor: SensorId,
        count: usize,
    },
    #[error("attack entry {entry} has a zero-length window")]
    EmptyWindow { entry: usize },
    #[error("attack entry {entry}: spoof range {spoof} must be finite and >= 0")]
    BadSpoof { entry: usize, spoof: f64 },
    #[error("attack entry {entry}: triggering spoof {spoof} must be below the true distance {limit}")]
    TriggeringTooFar { entry: usize, spoof: f64, limit: f64 },
    #[error("attack entry {entry}: deflection spoof {spoof} must exceed the largest true range {limit}")]
    DeflectionTooNear { entry: usize, spoof: f64, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackKind {
    Triggering { spoof_range: f64 },
    Deflection { spoof_range: f64 },
}

impl AttackKind {
    pub fn triggering() -> Self {
        AttackKind::Triggering {
            spoof_range: DEFAULT_TRIGGERING_RANGE,
        }
    }

    pub fn deflection() -> Self {
        AttackKind::Deflection {
            spoof_range: DEFAULT_DEFLECTION_RANGE,
        }
    }

    pub fn spoof_range(&self) -> f64 {
        match *self {
            AttackKind::Triggering { spoof_range } | AttackKind::Deflection { spoof_range } => {
                spoof_range
            }
        }
    }

    pub fn with_spoof_range(self, spoof_range: f64) -> Self {
        match self {
            AttackKind::Triggering { .. } => AttackKind::Triggering { spoof_range },
            AttackKind::Deflection { .. } => AttackKind::Deflection { spoof_range },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::Triggering { .. } => "triggering",
            AttackKind::Deflection { .. } => "deflection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackEntry {
    pub sensor: SensorId,
    pub kind: AttackKind,
    pub onset_run: u64,
    /// `None` means active until the scenario ends.
    pub duration_runs: Option<u64>,
}

impl AttackEntry {
    /// Active over `[onset, onset + duration)`.
    pub fn is_active(&self, run: u64) -> bool {
        run >= self.onset_run
            && self
                .duration_runs
                .is_none_or(|d| run - self.onset_run < d)
    }

    /// Exclusive end of the window, if bounded.
    pub fn end_run(&self) -> Option<u64> {
        self.duration_runs.map(|d| self.onset_run.saturating_add(d))
    }

    fn overlaps(&self, other: &AttackEntry) -> Option<u64> {
        if self.sensor != other.sensor {
            return None;
        }
        let start = self.onset_run.max(other.onset_run);
        let end = match (self.end_run(), other.end_run()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => u64::MAX,
        };
        (start < end).then_some(start)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttackSchedule {
    entries: Vec<AttackEntry>,
}

impl AttackSchedule {
    /// Builds a schedule, rejecting two entries that hit one sensor in the
    /// same run.
    pub fn new(entries: Vec<AttackEntry>) -> Result<Self, AttackError> {
        for (i, e) in entries.iter().enumerate() {
            if e.duration_runs == Some(0) {
                return Err(AttackError::EmptyWindow { entry: i });
            }
            let spoof = e.kind.spoof_range();
            if !(spoof.is_finite() && spoof >= 0.0) {
                return Err(AttackError::BadSpoof { entry: i, spoof });
            }
            for (j, other) in entries.iter().enumerate().skip(i + 1) {
                if let Some(run) = e.overlaps(other) {
                    return Err(AttackError::ScheduleConflict {
                        sensor: e.sensor,
                        run,
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[AttackEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks sensor indices and that each kind matches its meaning for this
    /// scene: triggering spoofs below the true distance, deflection spoofs
    /// beyond every true range.
    pub fn validate_for(&self, scene: &Scene) -> Result<(), AttackError> {
        self.validate_sensors(scene.layout.sensor_count())?;
        let reference_distance = scene.true_range(scene.layout.reference());
        let max_range = scene.true_ranges().into_iter().fold(0.0, f64::max);
        for (i, e) in self.entries.iter().enumerate() {
            match e.kind {
                AttackKind::Triggering { spoof_range } if spoof_range >= reference_distance => {
                    return Err(AttackError::TriggeringTooFar {
                        entry: i,
                        spoof: spoof_range,
                        limit: reference_distance,
                    })
                }
                AttackKind::Deflection { spoof_range } if spoof_range <= max_range => {
                    return Err(AttackError::DeflectionTooNear {
                        entry: i,
                        spoof: spoof_range,
                        limit: max_range,
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn validate_sensors(&self, sensor_count: usize) -> Result<(), AttackError> {
        match self.entries.iter().enumerate().find(|(_, e)| e.sensor >= sensor_count) {
            Some((entry, e)) => Err(AttackError::UnknownSensor {
                entry,
                sensor: e.sensor,
                count: sensor_count,
            }),
            None => Ok(()),
        }
    }

    pub fn active_at(&self, run: u64) -> impl Iterator<Item = &AttackEntry> {
        self.entries.iter().filter(move |e| e.is_active(run))
    }

    /// Same schedule with every spoof range replaced. Kind semantics are not
    /// re-checked, so sweeps may cross the true distance.
    pub fn with_spoof_range(&self, spoof_range: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| AttackEntry {
                    kind: e.kind.with_spoof_range(spoof_range),
                    ..*e
                })
                .collect(),
        }
    }
}

/// Overwrites the ranges of every sensor with an active entry and marks it
/// attacked. Other sensors pass through untouched.
pub fn inject(
    frame: &MeasurementFrame,
    schedule: &AttackSchedule,
) -> Result<MeasurementFrame, AttackError> {
    let mut out = frame.clone();
    let mut claimed: Vec<Option<usize>> = vec![None; frame.ranges.len()];
    for (i, e) in schedule.entries.iter().enumerate() {
        if !e.is_active(frame.run_index) {
            continue;
        }
        let slot = claimed
            .get_mut(e.sensor)
            .ok_or(AttackError::UnknownSensor {
                entry: i,
                sensor: e.sensor,
                count: frame.ranges.len(),
            })?;
        if let Some(first) = *slot {
            return Err(AttackError::ScheduleConflict {
                sensor: e.sensor,
                run: frame.run_index,
                first,
                second: i,
            });
        }
        *slot = Some(i);
        out.ranges[e.sensor] = e.kind.spoof_range();
        out.attacked[e.sensor] = true;
    }
    Ok(out)
}
