//! Noisy range measurement (`s = d + e`) with reproducible random streams.
//!
//! Every (run, sensor) pair draws from its own ChaCha8 stream whose 64-bit
//! seed is derived from the master seed with a SplitMix64 mix. ChaCha8 output
//! is specified bit-for-bit, so a seed reproduces the same frames on every
//! platform, and adding a sensor never shifts the draws of existing sensors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::{Scene, SensorId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensingError {
    #[error("uniform noise needs finite lo <= hi, got [{lo}, {hi}]")]
    BadUniform { lo: f64, hi: f64 },
    #[error("gaussian noise needs finite mean and sigma >= 0, got mean {mean}, sigma {sigma}")]
    BadGaussian { mean: f64, sigma: f64 },
    #[error("frame has {got} ranges, layout has {expected} sensors")]
    WrongWidth { expected: usize, got: usize },
    #[error("range for sensor {sensor} must be finite and >= 0, got {value}")]
    BadRange { sensor: SensorId, value: f64 },
}

/// Additive measurement error model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    None,
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sigma: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<(), SensingError> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::Uniform { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && lo <= hi {
                    Ok(())
                } else {
                    Err(SensingError::BadUniform { lo, hi })
                }
            }
            NoiseModel::Gaussian { mean, sigma } => {
                if mean.is_finite() && sigma.is_finite() && sigma >= 0.0 {
                    Ok(())
                } else {
                    Err(SensingError::BadGaussian { mean, sigma })
                }
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            NoiseModel::Gaussian { mean, sigma } => {
                if sigma == 0.0 {
                    mean
                } else {
                    Normal::new(mean, sigma)
                        .expect("validated sigma")
                        .sample(rng)
                }
            }
        }
    }

    /// Standard deviation of a single draw.
    pub fn std_dev(&self) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::Uniform { lo, hi } => (hi - lo) / 12f64.sqrt(),
            NoiseModel::Gaussian { sigma, .. } => sigma,
        }
    }

    /// Width of the support for bounded models; `None` for the Gaussian.
    pub fn width(&self) -> Option<f64> {
        match *self {
            NoiseModel::None => Some(0.0),
            NoiseModel::Uniform { lo, hi } => Some(hi - lo),
            NoiseModel::Gaussian { .. } => None,
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a seed with a label into a new, well-mixed seed.
pub fn mix_seed(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label))
}

/// Source of per-(run, sensor) random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStreams {
    seed: u64,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An unrelated family of streams, e.g. for a calibration pass.
    pub fn fork(&self, label: u64) -> Self {
        Self::new(mix_seed(self.seed, label))
    }

    pub fn stream(&self, run: u64, sensor: SensorId) -> ChaCha8Rng {
        let s = mix_seed(mix_seed(self.seed, run), sensor as u64);
        ChaCha8Rng::seed_from_u64(s)
    }
}

/// One time step of measured ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFrame {
    pub run_index: u64,
    pub ranges: Vec<f64>,
    /// Simulator ground truth. The detector never reads it.
    pub attacked: Vec<bool>,
}

impl MeasurementFrame {
    pub fn new(run_index: u64, ranges: Vec<f64>) -> Result<Self, SensingError> {
        if let Some((sensor, &value)) = ranges
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.is_finite() && **r >= 0.0))
        {
            return Err(SensingError::BadRange { sensor, value });
        }
        let attacked = vec![false; ranges.len()];
        Ok(Self {
            run_index,
            ranges,
            attacked,
        })
    }

    pub fn check_width(&self, sensor_count: usize) -> Result<(), SensingError> {
        if self.ranges.len() != sensor_count {
            return Err(SensingError::WrongWidth {
                expected: sensor_count,
                got: self.ranges.len(),
            });
        }
        Ok(())
    }

    pub fn any_attacked(&self) -> bool {
        self.attacked.iter().any(|&a| a)
    }
}

/// Measures every sensor once: true range plus an independent noise draw.
///
/// Negative results (possible only with Gaussian noise close to the sensor)
/// are clamped to 0, since a range sensor cannot report less.
pub fn measure(
    scene: &Scene,
    noise: &NoiseModel,
    streams: &RngStreams,
    run_index: u64,
) -> MeasurementFrame {
    let n = scene.layout.sensor_count();
    let ranges = (0..n)
        .map(|i| {
            let mut rng = streams.stream(run_index, i);
            (scene.true_range(i) + noise.draw(&mut rng)).max(0.0)
        })
        .collect();
    MeasurementFrame {
        run_index,
        ranges,
        attacked: vec![false; n],
    }
}
