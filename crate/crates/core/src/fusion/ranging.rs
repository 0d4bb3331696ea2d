use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{polar_to_position, PositionFix, TrajectoryTruth};
use crate::aoa::AoAEstimate;
use crate::util::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeMeasurement {
    pub timestamp_s: f64,
    /// NaN when the measurement was dropped.
    pub range_m: f64,
    pub valid: bool,
}

/// Dropout probability 0 up to `onset_m`, rising linearly to `p_max` at
/// `full_m` and constant beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropoutModel {
    pub onset_m: f64,
    pub full_m: f64,
    pub p_max: f64,
}

impl Default for DropoutModel {
    fn default() -> Self {
        Self {
            onset_m: 40.0,
            full_m: 90.0,
            p_max: 0.5,
        }
    }
}

impl DropoutModel {
    pub fn none() -> Self {
        Self {
            p_max: 0.0,
            ..Self::default()
        }
    }

    pub fn probability(&self, distance_m: f64) -> f64 {
        if distance_m <= self.onset_m {
            0.0
        } else if distance_m >= self.full_m {
            self.p_max
        } else {
            self.p_max * (distance_m - self.onset_m) / (self.full_m - self.onset_m)
        }
    }
}

/// Two-way-ranging model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UwbModel {
    pub rate_hz: f64,
    pub noise_sigma_m: f64,
    /// Offset of the first range timestamp from the trajectory start.
    pub time_offset_s: f64,
    pub dropout: DropoutModel,
}

impl Default for UwbModel {
    fn default() -> Self {
        Self {
            rate_hz: 1.0,
            noise_sigma_m: 0.3,
            time_offset_s: 0.2,
            dropout: DropoutModel::default(),
        }
    }
}

impl UwbModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate_hz > 0.0) || !(self.noise_sigma_m >= 0.0) || !(self.time_offset_s >= 0.0) {
            return Err(Error::Config("UWB rate must be positive, noise and offset non-negative".into()));
        }
        let d = &self.dropout;
        if !(0.0..=1.0).contains(&d.p_max) || !(d.full_m > d.onset_m) {
            return Err(Error::Config("dropout needs p_max in [0, 1] and full_m > onset_m".into()));
        }
        Ok(())
    }
}

/// Ranges at `rate_hz` over the trajectory span: true distance plus
/// Gaussian noise, each dropped with the distance-dependent probability.
pub fn simulate_uwb_ranges(truth: &TrajectoryTruth, model: &UwbModel, seed: u64) -> Result<Vec<RangeMeasurement>> {
    model.validate()?;
    let mut rng = rng_from_seed(seed);
    let noise = Normal::new(0.0, model.noise_sigma_m).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::new();
    let mut i = 0u64;
    loop {
        let t = truth.start_s() + model.time_offset_s + i as f64 / model.rate_hz;
        if t > truth.end_s() {
            break;
        }
        i += 1;
        let d = truth.distance(t)?;
        let n = noise.sample(&mut rng);
        let dropped = rng.random::<f64>() < model.dropout.probability(d);
        out.push(if dropped {
            RangeMeasurement {
                timestamp_s: t,
                range_m: f64::NAN,
                valid: false,
            }
        } else {
            RangeMeasurement {
                timestamp_s: t,
                range_m: (d + n).max(1e-3),
                valid: true,
            }
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub fixes: Vec<PositionFix>,
    /// Angle estimates with no valid range within the window.
    pub unpaired: usize,
}

/// Pairs each angle with the nearest valid range within ±`window_s`.
pub fn time_align(aoa: &[AoAEstimate], ranges: &[RangeMeasurement], window_s: f64) -> Alignment {
    let valid: Vec<&RangeMeasurement> = ranges.iter().filter(|r| r.valid).collect();
    let mut fixes = Vec::with_capacity(aoa.len());
    let mut unpaired = 0;
    for est in aoa {
        let t = est.timestamp_s;
        let idx = valid.partition_point(|r| r.timestamp_s < t);
        let nearest = [idx.checked_sub(1), Some(idx)]
            .into_iter()
            .flatten()
            .filter_map(|i| valid.get(i))
            .min_by(|a, b| (a.timestamp_s - t).abs().total_cmp(&(b.timestamp_s - t).abs()));
        match nearest {
            Some(r) if (r.timestamp_s - t).abs() <= window_s => match polar_to_position(est.angle_deg, r.range_m) {
                Ok((x_m, y_m)) => fixes.push(PositionFix {
                    timestamp_s: t,
                    x_m,
                    y_m,
                    angle_deg: est.angle_deg,
                    range_m: r.range_m,
                    range_timestamp_s: r.timestamp_s,
                }),
                Err(_) => unpaired += 1,
            },
            _ => unpaired += 1,
        }
    }
    Alignment { fixes, unpaired }
}
