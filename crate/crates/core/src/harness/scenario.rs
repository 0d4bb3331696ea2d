use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::{Processor, ScenarioConfig, SnapshotRecord};
use crate::frontend::{offline_calibrate, CalibrationTable};
use crate::fusion::{simulate_uwb_ranges, RangeMeasurement, TrajectoryTruth};
use crate::simchannel::{
    simulate_reception_with_noise_power, simulate_splitter_capture, CalToneSpec, ImpairmentState,
    MultiChannelCapture, Ray, UlaGeometry,
};
use crate::util::{derive_seed, rng_from_seed};
use crate::waveform::{build_srs_grid, ofdm_modulate, TimeDomainSignal, WaveformConfig};
use crate::{Error, Result};

const RUN_STREAM: u64 = 0;
const SPLITTER_STREAM: u64 = 1;
const RANGE_STREAM: u64 = 2;
const SNAPSHOT_STREAM_BASE: u64 = 1 << 32;

/// Uniform in (−π, π].
fn uniform_phase<R: Rng>(rng: &mut R) -> f64 {
    PI - 2.0 * PI * rng.random::<f64>()
}

/// A validated scenario with its per-run random state drawn.
pub struct Scenario {
    config: ScenarioConfig,
    waveform: WaveformConfig,
    truth: TrajectoryTruth,
    tone: CalToneSpec,
    tx: TimeDomainSignal,
    multipath: Vec<Ray>,
    intra_pair_offsets_rad: [f64; 2],
    lo_differential_rad: f64,
    times: Vec<f64>,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        if config.noise_only && !config.snr_db.is_finite() {
            return Err(Error::Config("noise-only scenarios need a finite snr_db".into()));
        }
        let waveform = config.waveform();
        let truth = config.truth()?;
        let mut rng = rng_from_seed(derive_seed(config.seed, RUN_STREAM));
        let drawn = [uniform_phase(&mut rng), uniform_phase(&mut rng)];
        let drawn_lo = uniform_phase(&mut rng);
        let tx = ofdm_modulate(&build_srs_grid(&waveform, config.snapshot_slots)?, &waveform)?;
        let mut times = Vec::new();
        loop {
            let t = truth.start_s() + times.len() as f64 / config.cadence_hz;
            if t > truth.end_s() {
                break;
            }
            times.push(t);
        }
        Ok(Self {
            tone: config.tone_spec(),
            multipath: config.rays.iter().map(|r| r.to_ray()).collect::<Result<_>>()?,
            intra_pair_offsets_rad: config.impairments.intra_pair_offsets_rad.unwrap_or(drawn),
            lo_differential_rad: config.impairments.lo_differential_rad.unwrap_or(drawn_lo),
            config: config.clone(),
            waveform,
            truth,
            tx,
            times,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn waveform(&self) -> &WaveformConfig {
        &self.waveform
    }

    pub fn truth(&self) -> &TrajectoryTruth {
        &self.truth
    }

    pub fn tone(&self) -> &CalToneSpec {
        &self.tone
    }

    /// Static offsets and LO differential injected in this run.
    pub fn injected_phases(&self) -> ([f64; 2], f64) {
        (self.intra_pair_offsets_rad, self.lo_differential_rad)
    }

    /// Snapshot timestamps: the trajectory start, then every 1/cadence seconds.
    pub fn snapshot_times(&self) -> &[f64] {
        &self.times
    }

    fn impairments(&self, cfo_hz: f64, timing_offset_samples: usize) -> ImpairmentState {
        ImpairmentState {
            intra_pair_offsets_rad: self.intra_pair_offsets_rad,
            lo_differential_rad: self.lo_differential_rad,
            cfo_hz,
            timing_offset_samples,
            snr_db: self.config.snr_db,
        }
    }

    /// Offline 1-4 splitter capture with this run's static offsets.
    pub fn splitter_capture(&self) -> Result<MultiChannelCapture> {
        let imp = ImpairmentState {
            snr_db: self.config.calibration.splitter_snr_db,
            ..self.impairments(0.0, 0)
        };
        let mut cap = simulate_splitter_capture(
            &self.waveform,
            &self.tone,
            &imp,
            self.config.calibration.splitter_samples,
            derive_seed(self.config.seed, SPLITTER_STREAM),
        )?;
        cap.quantize_f32();
        Ok(cap)
    }

    /// Offline calibration table from [`Self::splitter_capture`].
    pub fn calibrate(&self) -> Result<CalibrationTable> {
        offline_calibrate(&self.splitter_capture()?)
    }

    /// Noise power per sample matching the configured per-RE SNR for a
    /// unit-gain line-of-sight ray.
    fn noise_power(&self) -> f64 {
        if self.config.snr_db == f64::INFINITY {
            return 0.0;
        }
        let active: Vec<f64> = self.tx.samples.iter().map(|z| z.norm_sqr()).filter(|&p| p > 0.0).collect();
        let power = active.iter().sum::<f64>() / active.len().max(1) as f64;
        power / (self.tx.occupied_fraction * 10f64.powf(self.config.snr_db / 10.0))
    }

    /// Snapshot `index`: the line-of-sight ray toward the true position plus
    /// the static reflections, with per-snapshot CFO and timing offset,
    /// rounded to single precision.
    pub fn simulate_snapshot(&self, index: usize) -> Result<MultiChannelCapture> {
        let t = *self
            .times
            .get(index)
            .ok_or_else(|| Error::Usage(format!("snapshot {index} outside the scenario")))?;
        let seed = derive_seed(self.config.seed, SNAPSHOT_STREAM_BASE + index as u64);
        let mut rng = rng_from_seed(seed);
        let cfo = self.config.impairments.cfo_max_hz * (2.0 * rng.random::<f64>() - 1.0);
        let timing = rng.random_range(0..=self.config.impairments.max_timing_offset_samples);
        let (x, y) = self.truth.position(t)?;
        let mut rays = vec![Ray::new(x.atan2(y).to_degrees(), 0.0, Complex64::new(1.0, 0.0))?];
        rays.extend_from_slice(&self.multipath);
        let silent;
        let tx = if self.config.noise_only {
            silent = TimeDomainSignal {
                samples: vec![Complex64::new(0.0, 0.0); self.tx.len()],
                ..self.tx.clone()
            };
            &silent
        } else {
            &self.tx
        };
        let mut cap = simulate_reception_with_noise_power(
            tx,
            &rays,
            &UlaGeometry::default(),
            &self.impairments(cfo, timing),
            Some((&self.waveform, &self.tone)),
            self.noise_power(),
            derive_seed(seed, 1),
        )?;
        cap.meta.config_id = Some(self.waveform.config_id);
        cap.meta.carrier_freq_hz = self.waveform.carrier_freq_hz;
        cap.meta.timestamp_s = t;
        cap.meta.seed = seed;
        cap.quantize_f32();
        Ok(cap)
    }

    pub fn ranges(&self) -> Result<Vec<RangeMeasurement>> {
        simulate_uwb_ranges(&self.truth, &self.config.uwb, derive_seed(self.config.seed, RANGE_STREAM))
    }

    pub fn processor(&self, table: CalibrationTable) -> Result<Processor> {
        Processor::new(
            self.waveform.clone(),
            self.config.snapshot_slots,
            self.tone,
            table,
            &self.config.estimator,
            self.config.grid_step_deg,
        )
    }
}

/// Outcome of one snapshot; failures keep their timestamp and error.
pub fn process_record(processor: &Processor, capture: &MultiChannelCapture) -> SnapshotRecord {
    SnapshotRecord::from_result(capture.meta.timestamp_s, processor.process(capture))
}

/// Everything a run produced, ready for [`super::build_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub calibration: CalibrationTable,
    pub records: Vec<SnapshotRecord>,
    pub ranges: Vec<RangeMeasurement>,
}

/// Simulates and processes every snapshot in parallel; per-snapshot
/// failures are recorded and the run continues. Deterministic given the
/// config, independent of thread count.
pub fn simulate_and_process(config: &ScenarioConfig) -> Result<ScenarioRun> {
    let scenario = Scenario::new(config)?;
    let calibration = scenario.calibrate()?;
    let processor = scenario.processor(calibration)?;
    let records = (0..scenario.snapshot_times().len())
        .into_par_iter()
        .map(|i| match scenario.simulate_snapshot(i) {
            Ok(cap) => process_record(&processor, &cap),
            Err(e) => SnapshotRecord::from_result(scenario.snapshot_times()[i], Err(e)),
        })
        .collect();
    Ok(ScenarioRun {
        calibration,
        records,
        ranges: scenario.ranges()?,
    })
}
