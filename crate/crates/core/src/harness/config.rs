use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fusion::{TrajectoryTruth, UwbModel, WALKING_SPEED_MPS};
use crate::simchannel::{CalToneSpec, Ray};
use crate::waveform::{config_from_catalog, ConfigId, WaveformConfig};
use crate::{Error, Result};

/// Complete description of one simulated experiment, read from TOML.
///
/// The user's line-of-sight ray is always present and follows the
/// trajectory; `rays` lists extra static reflections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub config_id: ConfigId,
    pub seed: u64,
    /// Per-resource-element SNR on element 0; `inf` disables noise.
    pub snr_db: f64,
    /// Snapshot length in slots.
    pub snapshot_slots: usize,
    /// Snapshots per second of trajectory time.
    pub cadence_hz: f64,
    pub estimator: String,
    pub grid_step_deg: f64,
    /// Largest accepted gap between an angle and its paired range.
    pub align_window_s: f64,
    /// Replace the transmitter with silence: captures hold noise and the tone only.
    pub noise_only: bool,
    pub rays: Vec<RaySpec>,
    pub impairments: ImpairmentRanges,
    pub calibration: CalibrationSettings,
    pub trajectory: TrajectorySpec,
    pub uwb: UwbModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySpec {
    pub aoa_deg: f64,
    pub delay_samples: f64,
    /// Power relative to the line-of-sight ray.
    pub gain_db: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

impl RaySpec {
    pub fn to_ray(&self) -> Result<Ray> {
        let g = Complex64::from_polar(10f64.powf(self.gain_db / 20.0), self.phase_deg.to_radians());
        Ray::new(self.aoa_deg, self.delay_samples, g)
    }
}

/// Ranges the per-run and per-snapshot impairments are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpairmentRanges {
    /// Per-snapshot CFO uniform in ±cfo_max_hz.
    pub cfo_max_hz: f64,
    /// Per-snapshot noise-only prefix uniform in [0, max].
    pub max_timing_offset_samples: usize,
    /// Fixed static offsets; drawn uniformly from (−π, π] per run when absent.
    pub intra_pair_offsets_rad: Option<[f64; 2]>,
    /// Fixed LO differential; drawn uniformly from (−π, π] per run when absent.
    pub lo_differential_rad: Option<f64>,
}

impl Default for ImpairmentRanges {
    fn default() -> Self {
        Self {
            cfo_max_hz: 1000.0,
            max_timing_offset_samples: 1024,
            intra_pair_offsets_rad: None,
            lo_differential_rad: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSettings {
    /// Tone placement; the highest comb-empty subcarrier on channels 0 and 2 when absent.
    pub tone: Option<CalToneSpec>,
    /// Tone-to-noise ratio of the offline splitter capture.
    pub splitter_snr_db: f64,
    pub splitter_samples: usize,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            tone: None,
            splitter_snr_db: 30.0,
            splitter_samples: 16384,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathPoint {
    pub label: String,
    pub x_m: f64,
    pub y_m: f64,
}

/// Polyline walked at constant speed with a dwell at every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySpec {
    pub speed_mps: f64,
    pub dwell_s: f64,
    pub start_s: f64,
    pub points: Vec<PathPoint>,
}

impl Default for TrajectorySpec {
    /// The reconstructed pedestrian loop (see [`TrajectoryTruth::reconstructed_field_trial`]).
    fn default() -> Self {
        let truth = TrajectoryTruth::reconstructed_field_trial();
        Self {
            speed_mps: WALKING_SPEED_MPS,
            dwell_s: 30.0,
            start_s: 0.0,
            points: truth
                .landmarks()
                .iter()
                .map(|l| PathPoint {
                    label: l.label.clone(),
                    x_m: l.x_m,
                    y_m: l.y_m,
                })
                .collect(),
        }
    }
}

impl TrajectorySpec {
    pub fn truth(&self) -> Result<TrajectoryTruth> {
        if let Some(p) = self.points.iter().find(|p| !(p.y_m > 0.0)) {
            return Err(Error::Config(format!(
                "trajectory point `{}` is not in front of the array (y = {} m)",
                p.label, p.y_m
            )));
        }
        let pts: Vec<(&str, f64, f64)> = self.points.iter().map(|p| (p.label.as_str(), p.x_m, p.y_m)).collect();
        TrajectoryTruth::from_path(&pts, self.speed_mps, self.dwell_s, self.start_s)
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            config_id: ConfigId::II,
            seed: 1,
            snr_db: 20.0,
            snapshot_slots: 2,
            cadence_hz: 1.0,
            estimator: "esprit".into(),
            grid_step_deg: crate::aoa::DEFAULT_GRID_STEP_DEG,
            align_window_s: 0.5,
            noise_only: false,
            rays: vec![RaySpec {
                aoa_deg: -50.0,
                delay_samples: 15.0,
                gain_db: -12.0,
                phase_deg: 0.0,
            }],
            impairments: ImpairmentRanges::default(),
            calibration: CalibrationSettings::default(),
            trajectory: TrajectorySpec::default(),
            uwb: UwbModel::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config serializes")
    }

    pub fn waveform(&self) -> WaveformConfig {
        config_from_catalog(self.config_id)
    }

    pub fn tone_spec(&self) -> CalToneSpec {
        self.calibration.tone.unwrap_or_else(|| CalToneSpec::default_for(&self.waveform()))
    }

    pub fn truth(&self) -> Result<TrajectoryTruth> {
        self.trajectory.truth()
    }

    pub fn validate(&self) -> Result<()> {
        if self.snapshot_slots < 1 {
            return Err(Error::Config("snapshot length must be at least one slot".into()));
        }
        if !(self.cadence_hz > 0.0) || !self.cadence_hz.is_finite() {
            return Err(Error::Config("snapshot cadence must be positive".into()));
        }
        if self.snr_db.is_nan() {
            return Err(Error::Config("snr_db must be a number".into()));
        }
        if !(self.grid_step_deg > 0.0 && self.grid_step_deg <= 10.0) {
            return Err(Error::Config("grid_step_deg must lie in (0, 10]".into()));
        }
        if !(self.align_window_s >= 0.0) {
            return Err(Error::Config("align_window_s must be non-negative".into()));
        }
        crate::aoa::registry().create(&self.estimator)?;
        for r in &self.rays {
            r.to_ray().map_err(|e| Error::Config(format!("ray: {e}")))?;
        }
        let imp = &self.impairments;
        if !(imp.cfo_max_hz >= 0.0) || !imp.cfo_max_hz.is_finite() {
            return Err(Error::Config("cfo_max_hz must be non-negative".into()));
        }
        let in_range = |p: f64| p > -std::f64::consts::PI && p <= std::f64::consts::PI;
        if let Some([a, b]) = imp.intra_pair_offsets_rad {
            if !in_range(a) || !in_range(b) {
                return Err(Error::Config("intra-pair offsets must lie in (−π, π]".into()));
            }
        }
        if imp.lo_differential_rad.is_some_and(|p| !in_range(p)) {
            return Err(Error::Config("LO differential must lie in (−π, π]".into()));
        }
        let wf = self.waveform();
        self.tone_spec().validate(&wf)?;
        if self.calibration.splitter_samples < 64 {
            return Err(Error::Config("splitter capture needs at least 64 samples".into()));
        }
        self.truth()?;
        self.uwb.validate()?;
        Ok(())
    }
}
