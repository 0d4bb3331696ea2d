use std::f64::consts::PI;

use num_complex::Complex64;

use crate::simchannel::MultiChannelCapture;
use crate::waveform::WaveformConfig;
use crate::{Error, Result};

const MIN_SYMBOLS: usize = 4;

/// CP-based CFO estimate over the default ULA channels 1, 2 and 3.
pub fn cfo_estimate_cp(capture: &MultiChannelCapture, config: &WaveformConfig, start_offset: usize) -> Result<f64> {
    cfo_estimate_cp_on(capture, config, start_offset, &[1, 2, 3])
}

/// cfo = −(scs/2π)·arg Σ r[n]·conj(r[n+N]), summed over the cyclic prefixes
/// of every SRS symbol that fits after `start_offset` and over `channels`.
/// A frequency offset f advances the phase by 2π·f/scs over one FFT length,
/// hence the sign. Unambiguous for |f| < scs/2.
pub fn cfo_estimate_cp_on(
    capture: &MultiChannelCapture,
    config: &WaveformConfig,
    start_offset: usize,
    channels: &[usize],
) -> Result<f64> {
    capture.validate()?;
    let len = capture.num_samples();
    let n = config.fft_size;
    let mut symbols = 0;
    while start_offset + config.samples_for_symbols(symbols + 1) <= len {
        symbols += 1;
    }
    if symbols < MIN_SYMBOLS {
        return Err(Error::Truncation {
            needed: start_offset + config.samples_for_symbols(MIN_SYMBOLS),
            available: len,
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for l in (0..symbols).filter(|&l| config.is_srs_symbol(l)) {
        let begin = start_offset + config.symbol_start(l);
        for &ch in channels {
            let x = capture
                .channels
                .get(ch)
                .ok_or_else(|| Error::Usage(format!("no channel {ch}")))?;
            for i in begin..begin + config.cp_len(l) {
                acc += x[i] * x[i + n].conj();
            }
        }
    }
    Ok(-config.scs_hz / (2.0 * PI) * acc.arg())
}

/// Multiplies every channel by exp(−j2π·cfo·n/fs).
pub fn cfo_correct(capture: &MultiChannelCapture, cfo_hz: f64) -> MultiChannelCapture {
    let mut out = capture.clone();
    if cfo_hz == 0.0 {
        return out;
    }
    let w = -2.0 * PI * cfo_hz / capture.sample_rate_hz;
    for ch in &mut out.channels {
        for (i, z) in ch.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, w * i as f64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{apply_phase_compensation, CalibrationTable};
    use crate::simchannel::{simulate_reception, ImpairmentState, Ray, UlaGeometry};
    use crate::util::rng_from_seed;
    use crate::waveform::{build_srs_grid, config_from_catalog, ofdm_modulate, ConfigId, TimeDomainSignal};
    use rand::Rng;

    fn tx(cfg: &WaveformConfig, slots: usize) -> TimeDomainSignal {
        ofdm_modulate(&build_srs_grid(cfg, slots).unwrap(), cfg).unwrap()
    }

    fn capture(tx: &TimeDomainSignal, cfo: f64, snr: f64, seed: u64) -> MultiChannelCapture {
        let imp = ImpairmentState {
            cfo_hz: cfo,
            snr_db: snr,
            ..ImpairmentState::ideal()
        };
        let ray = Ray::new(-8.0, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        simulate_reception(tx, &[ray], &UlaGeometry::default(), &imp, None, seed).unwrap()
    }

    #[test]
    fn zero_cfo_noiseless() {
        let cfg = config_from_catalog(ConfigId::III);
        let cap = capture(&tx(&cfg, 1), 0.0, f64::INFINITY, 0);
        assert!(cfo_estimate_cp(&cap, &cfg, 0).unwrap().abs() < 1e-6 * cfg.scs_hz);
    }

    #[test]
    fn aliasing_beyond_half_scs() {
        let cfg = config_from_catalog(ConfigId::III);
        assert_eq!(cfg.scs_hz, 30e3);
        let cap = capture(&tx(&cfg, 1), 16e3, f64::INFINITY, 0);
        let est = cfo_estimate_cp(&cap, &cfg, 0).unwrap();
        assert!((est + 14e3).abs() < 1e-3, "{est}");
    }

    #[test]
    fn truncation() {
        let cfg = config_from_catalog(ConfigId::III);
        let cap = capture(&tx(&cfg, 1), 0.0, f64::INFINITY, 0);
        let late = cap.num_samples() - cfg.samples_for_symbols(3);
        assert!(matches!(cfo_estimate_cp(&cap, &cfg, late), Err(Error::Truncation { .. })));
    }

    /// 1 kHz at 20 dB with the four SRS symbols of one slot. With SNR defined
    /// per resource element the error standard deviation is close to 28 Hz,
    /// so a 30 Hz bound holds in only about 70% of trials. The bound below
    /// is the measured 95th percentile (about 55 Hz) with margin.
    #[test]
    fn one_khz_at_20db_four_symbols() {
        let cfg = config_from_catalog(ConfigId::III);
        let signal = tx(&cfg, 1);
        let mut errors: Vec<f64> = (0..400)
            .map(|seed| (cfo_estimate_cp(&capture(&signal, 1e3, 20.0, seed), &cfg, 0).unwrap() - 1e3).abs())
            .collect();
        errors.sort_by(f64::total_cmp);
        let p95 = errors[379];
        let within_30 = errors.iter().filter(|&&e| e < 30.0).count();
        let mean_signed: f64 = (0..400)
            .map(|seed| cfo_estimate_cp(&capture(&signal, 1e3, 20.0, 1000 + seed), &cfg, 0).unwrap() - 1e3)
            .sum::<f64>()
            / 400.0;
        eprintln!("cfo p95 error {p95:.1} Hz, bias {mean_signed:.2} Hz, {within_30}/400 under 30 Hz");
        assert!(p95 < 0.003 * cfg.scs_hz, "{p95}");
        assert!(mean_signed.abs() < 5.0);
    }

    #[test]
    fn unbiased_up_to_04_scs() {
        let cfg = config_from_catalog(ConfigId::VII);
        let signal = tx(&cfg, 2);
        for frac in [-0.4, -0.1, 0.2, 0.4] {
            let f = frac * cfg.scs_hz;
            let errs: Vec<f64> = (0..60)
                .map(|seed| cfo_estimate_cp(&capture(&signal, f, 20.0, seed), &cfg, 0).unwrap() - f)
                .collect();
            let mean = errs.iter().sum::<f64>() / errs.len() as f64;
            let sd = (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (errs.len() - 1) as f64).sqrt();
            assert!(mean.abs() < 4.0 * sd / (errs.len() as f64).sqrt() + 1e-6, "{frac}: {mean} ± {sd}");
        }
    }

    #[test]
    fn correct_inverse() {
        let cfg = config_from_catalog(ConfigId::I);
        let clean = capture(&tx(&cfg, 1), 0.0, f64::INFINITY, 0);
        assert_eq!(cfo_correct(&clean, 0.0), clean);
        let shifted = capture(&tx(&cfg, 1), 2345.0, f64::INFINITY, 0);
        let back = cfo_correct(&shifted, 2345.0);
        for ch in 1..4 {
            for (a, b) in back.channels[ch].iter().zip(&clean.channels[ch]) {
                assert!((a - b).norm() < 1e-9);
            }
        }
        let round = cfo_correct(&cfo_correct(&shifted, 777.0), -777.0);
        for ch in 0..4 {
            for (a, b) in round.channels[ch].iter().zip(&shifted.channels[ch]) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn residual_after_correction() {
        let cfg = config_from_catalog(ConfigId::V);
        let signal = tx(&cfg, 2);
        let mut rng = rng_from_seed(8);
        for seed in 0..30 {
            let f = rng.random_range(-0.4..0.4) * cfg.scs_hz;
            let cap = capture(&signal, f, 20.0, seed);
            let est = cfo_estimate_cp(&cap, &cfg, 0).unwrap();
            let fixed = cfo_correct(&cap, est);
            let residual = cfo_estimate_cp(&fixed, &cfg, 0).unwrap();
            assert!(residual.abs() < 0.005 * cfg.scs_hz);
            assert!((f - est).abs() < 0.005 * cfg.scs_hz);
        }
    }

    #[test]
    fn compensation_and_correction_commute() {
        let cfg = config_from_catalog(ConfigId::V);
        let imp = ImpairmentState {
            intra_pair_offsets_rad: [0.5, -1.0],
            lo_differential_rad: 2.0,
            cfo_hz: 3000.0,
            snr_db: 15.0,
            ..ImpairmentState::ideal()
        };
        let ray = Ray::new(20.0, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        let cap = simulate_reception(&tx(&cfg, 1), &[ray], &UlaGeometry::default(), &imp, None, 4).unwrap();
        let table = CalibrationTable {
            intra_pair_offsets_rad: [0.5, -1.0],
            lo_differential_rad: Some(2.0),
            timestamp_s: 0.0,
        };
        let a = cfo_correct(&apply_phase_compensation(&cap, &table).unwrap(), 3000.0);
        let b = apply_phase_compensation(&cfo_correct(&cap, 3000.0), &table).unwrap();
        for ch in 0..4 {
            for (x, y) in a.channels[ch].iter().zip(&b.channels[ch]) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
