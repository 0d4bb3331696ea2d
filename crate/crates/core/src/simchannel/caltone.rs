use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::waveform::{TimeDomainSignal, WaveformConfig};
use crate::{Error, Result};

/// Calibration tone injected through the splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalToneSpec {
    /// Grid subcarrier index; must be a comb-empty position.
    pub subcarrier: usize,
    /// Time-domain amplitude.
    pub amplitude: f64,
    /// Receiver channels fed by the splitter: one in pair A, one in pair B.
    pub channels: [usize; 2],
}

impl CalToneSpec {
    /// Highest comb-empty subcarrier, amplitude 0.25, wired to channels 0 and 2.
    pub fn default_for(config: &WaveformConfig) -> Self {
        let subcarrier = (0..config.num_subcarriers())
            .rev()
            .find(|k| k % config.comb_ktc != config.comb_offset)
            .unwrap_or(0);
        Self {
            subcarrier,
            amplitude: 0.25,
            channels: [0, 2],
        }
    }

    pub fn validate(&self, config: &WaveformConfig) -> Result<()> {
        if self.subcarrier >= config.num_subcarriers() {
            return Err(Error::Config(format!(
                "tone subcarrier {} outside the {}-subcarrier grid",
                self.subcarrier,
                config.num_subcarriers()
            )));
        }
        if self.subcarrier % config.comb_ktc == config.comb_offset {
            return Err(Error::Config(format!(
                "tone subcarrier {} collides with the SRS comb",
                self.subcarrier
            )));
        }
        if !(self.amplitude > 0.0) {
            return Err(Error::Config("tone amplitude must be positive".into()));
        }
        if self.channels[0] / 2 != 0 || self.channels[1] / 2 != 1 {
            return Err(Error::Config("tone must feed one channel of pair A and one of pair B".into()));
        }
        Ok(())
    }

    /// FFT bin of the tone.
    pub fn bin(&self, config: &WaveformConfig) -> usize {
        config.subcarrier_bin(self.subcarrier)
    }
}

/// Continuous complex exponential on the tone subcarrier.
pub fn generate_cal_tone(
    config: &WaveformConfig,
    spec: &CalToneSpec,
    num_samples: usize,
) -> Result<TimeDomainSignal> {
    spec.validate(config)?;
    let n = config.fft_size as u64;
    let bin = spec.bin(config) as u64;
    let samples = (0..num_samples as u64)
        .map(|i| Complex64::from_polar(spec.amplitude, 2.0 * PI * ((bin * i) % n) as f64 / n as f64))
        .collect();
    Ok(TimeDomainSignal {
        samples,
        sample_rate_hz: config.sample_rate_hz,
        occupied_fraction: 1.0 / config.fft_size as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{config_from_catalog, ofdm_demodulate_symbols, ConfigId};

    #[test]
    fn odd_subcarrier_accepted_even_rejected() {
        let c = config_from_catalog(ConfigId::III);
        let mut spec = CalToneSpec::default_for(&c);
        spec.subcarrier = 1;
        assert!(generate_cal_tone(&c, &spec, 100).is_ok());
        spec.subcarrier = 0;
        assert!(matches!(generate_cal_tone(&c, &spec, 100), Err(Error::Config(_))));
    }

    #[test]
    fn default_is_comb_empty() {
        for id in ConfigId::ALL {
            let c = config_from_catalog(id);
            let spec = CalToneSpec::default_for(&c);
            assert!(spec.validate(&c).is_ok());
            let c1 = c.clone().with_comb_offset(1).unwrap();
            assert!(CalToneSpec::default_for(&c1).validate(&c1).is_ok());
        }
    }

    #[test]
    fn constant_amplitude() {
        let c = config_from_catalog(ConfigId::VII);
        let spec = CalToneSpec::default_for(&c);
        let t = generate_cal_tone(&c, &spec, 5000).unwrap();
        assert!(t.samples.iter().all(|z| (z.norm() - spec.amplitude).abs() < 1e-12));
    }

    #[test]
    fn tone_energy_in_one_subcarrier() {
        let c = config_from_catalog(ConfigId::II);
        let mut spec = CalToneSpec::default_for(&c);
        spec.subcarrier = 401;
        let t = generate_cal_tone(&c, &spec, c.samples_for_symbols(1)).unwrap();
        let g = ofdm_demodulate_symbols(&t.samples, &c, 0, 1).unwrap();
        let total: f64 = g.symbol(0).iter().map(|z| z.norm_sqr()).sum();
        let at_tone = g.get(401, 0).norm_sqr();
        assert!(at_tone / total >= 0.99);
    }
}
