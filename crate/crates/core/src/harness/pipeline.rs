use crate::aoa::{
    estimate_angle, registry, reported_sinr_db, sample_covariance, sinr_estimate, AoAEstimate, AoaEstimator,
    EstimatorInput, PilotObservations,
};
use crate::frontend::{
    apply_phase_compensation, cancel_cal_tone, cfo_correct, cfo_estimate_cp, measure_cal_tone, timing_sync_with,
    CalibrationTable, SyncOptions,
};
use crate::frontend::lo_from_tone;
use crate::simchannel::{CalToneSpec, MultiChannelCapture, UlaGeometry};
use crate::waveform::{build_srs_grid, ofdm_demodulate_symbols, ofdm_modulate, TimeDomainSignal, WaveformConfig, SYMBOLS_PER_SLOT};
use crate::{Error, Result};

/// Per-snapshot receiver chain for a fixed waveform, tone and offline table.
pub struct Processor {
    config: WaveformConfig,
    geometry: UlaGeometry,
    tone: CalToneSpec,
    offline: CalibrationTable,
    replica: TimeDomainSignal,
    num_symbols: usize,
    estimator: Box<dyn AoaEstimator>,
    grid_step_deg: f64,
    sync: SyncOptions,
}

impl Processor {
    pub fn new(
        config: WaveformConfig,
        snapshot_slots: usize,
        tone: CalToneSpec,
        offline: CalibrationTable,
        estimator: &str,
        grid_step_deg: f64,
    ) -> Result<Self> {
        if snapshot_slots == 0 {
            return Err(Error::Config("snapshot length must be at least one slot".into()));
        }
        tone.validate(&config)?;
        let replica = ofdm_modulate(&build_srs_grid(&config, snapshot_slots)?, &config)?;
        Ok(Self {
            sync: SyncOptions::for_config(&config),
            geometry: UlaGeometry::default(),
            num_symbols: snapshot_slots * SYMBOLS_PER_SLOT,
            estimator: registry().create(estimator)?,
            config,
            tone,
            offline,
            replica,
            grid_step_deg,
        })
    }

    pub fn estimator_name(&self) -> &'static str {
        self.estimator.name()
    }

    /// Samples fed into the FFT window ahead of the sync point, so that
    /// energy arriving slightly before the strongest path stays inside the
    /// cyclic prefix.
    fn backoff(&self, start: usize) -> usize {
        (self.config.cp_len(1) / 4).min(start)
    }

    /// Runtime tone calibration and cancellation, phase compensation,
    /// timing sync, CFO correction, demodulation, order selection, AoA
    /// estimation, LCMV selection and SINR.
    pub fn process(&self, capture: &MultiChannelCapture) -> Result<AoAEstimate> {
        let cfg = &self.config;
        let tone = measure_cal_tone(capture, cfg, &self.tone)?;
        let table = lo_from_tone(&tone, &self.offline, &self.tone, capture.meta.timestamp_s);
        let clean = cancel_cal_tone(capture, cfg, &self.tone, &tone);
        let compensated = apply_phase_compensation(&clean, &table)?;

        let sync = timing_sync_with(&compensated, &self.replica, &self.sync)?;
        let cfo = cfo_estimate_cp(&compensated, cfg, sync.start_offset)?;
        let corrected = cfo_correct(&compensated, cfo);

        let backoff = self.backoff(sync.start_offset);
        let start = sync.start_offset - backoff;
        let grids = corrected
            .ula_channels(&self.geometry)
            .into_iter()
            .map(|x| ofdm_demodulate_symbols(x, cfg, start, self.num_symbols))
            .collect::<Result<Vec<_>>>()?;
        let pilots = PilotObservations::from_grids(&grids, cfg)?;
        let covariance = sample_covariance(&pilots.snapshot_matrix())?;
        let selected = estimate_angle(
            self.estimator.as_ref(),
            &EstimatorInput {
                covariance: &covariance,
                pilots: Some(&pilots),
                geometry: &self.geometry,
                grid_step_deg: self.grid_step_deg,
            },
        )?;
        let sinr = sinr_estimate(&grids[0], cfg, &[self.tone.subcarrier])?;

        Ok(AoAEstimate {
            timestamp_s: capture.meta.timestamp_s,
            estimator: self.estimator.name().to_string(),
            angle_deg: selected.angle_deg,
            channel_order: selected.channel_order,
            raw_order: selected.raw_order,
            candidates_deg: selected.candidates.angles_deg,
            delays_samples: selected
                .candidates
                .delays_samples
                .map(|d| d.into_iter().map(|v| v - backoff as f64).collect()),
            sinr_db: reported_sinr_db(sinr),
            low_confidence: selected.candidates.low_confidence,
        })
    }
}
