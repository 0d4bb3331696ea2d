use std::f64::consts::PI;

use num_complex::Complex64;

use super::{
    channel_phase, generate_cal_tone, CalToneSpec, CaptureMeta, ImpairmentState, MultiChannelCapture, Ray,
    UlaGeometry, NUM_RX_CHANNELS,
};
use crate::util::{complex_gaussian, fft_plan, ifft_plan, rng_from_seed};
use crate::waveform::{TimeDomainSignal, WaveformConfig};
use crate::{Error, Result};

/// ULA response; element m = exp(+j·2π·d·m·sin θ), θ from broadside,
/// positive toward increasing element index.
pub fn steering_vector(aoa_deg: f64, geometry: &UlaGeometry) -> Result<Vec<Complex64>> {
    if !(aoa_deg.abs() < 90.0) {
        return Err(Error::Domain(format!("angle {aoa_deg}° outside (-90°, 90°)")));
    }
    Ok(steering_unchecked(aoa_deg, geometry.num_elements, geometry.element_spacing_wavelengths))
}

pub(crate) fn steering_unchecked(aoa_deg: f64, elements: usize, spacing: f64) -> Vec<Complex64> {
    let w = 2.0 * PI * spacing * aoa_deg.to_radians().sin();
    (0..elements).map(|m| Complex64::from_polar(1.0, w * m as f64)).collect()
}

/// Delays `x` by `delay` samples, keeping the length. The integer part is a
/// sample shift; the fractional part a frequency-domain phase ramp.
pub fn delay_signal(x: &[Complex64], delay: f64) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let whole = delay.floor() as usize;
    let frac = delay - whole as f64;
    let shifted_frac: Vec<Complex64> = if frac.abs() < 1e-15 {
        x.to_vec()
    } else {
        let len = (x.len() + 64).next_power_of_two();
        let mut buf = vec![zero; len];
        buf[..x.len()].copy_from_slice(x);
        fft_plan(len).process(&mut buf);
        for (k, z) in buf.iter_mut().enumerate() {
            let f = if k < len / 2 {
                k as f64
            } else if k == len / 2 {
                0.0
            } else {
                k as f64 - len as f64
            };
            *z *= Complex64::from_polar(1.0 / len as f64, -2.0 * PI * f * frac / len as f64);
        }
        ifft_plan(len).process(&mut buf);
        buf.truncate(x.len());
        buf
    };
    let mut out = vec![zero; x.len()];
    if whole < x.len() {
        out[whole..].copy_from_slice(&shifted_frac[..x.len() - whole]);
    }
    out
}

/// Noiseless array signals, one vector per element.
fn array_signals(tx: &TimeDomainSignal, rays: &[Ray], geometry: &UlaGeometry) -> Result<Vec<Vec<Complex64>>> {
    if rays.is_empty() {
        return Err(Error::Usage("simulation needs at least one ray".into()));
    }
    geometry.validate()?;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); tx.len()]; geometry.num_elements];
    for ray in rays {
        ray.validate()?;
        let a = steering_vector(ray.aoa_deg, geometry)?;
        let delayed = delay_signal(&tx.samples, ray.delay_samples);
        for (m, sig) in out.iter_mut().enumerate() {
            let w = ray.complex_gain * a[m];
            for (o, d) in sig.iter_mut().zip(&delayed) {
                *o += w * d;
            }
        }
    }
    Ok(out)
}

/// Noise power that puts element 0 at `snr_db` per resource element.
fn noise_power_for(tx: &TimeDomainSignal, element0: &[Complex64], snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    let active = tx.samples.iter().filter(|z| z.norm_sqr() > 0.0).count().max(1);
    let power = element0.iter().map(|z| z.norm_sqr()).sum::<f64>() / active as f64;
    power / (tx.occupied_fraction * 10f64.powf(snr_db / 10.0))
}

/// Per-element signal, CFO, calibration tone, receiver phase rotations,
/// white noise at `snr_db` per resource element on element 0 and a noise-only
/// prefix of `timing_offset_samples`.
pub fn simulate_reception(
    tx: &TimeDomainSignal,
    rays: &[Ray],
    geometry: &UlaGeometry,
    impairments: &ImpairmentState,
    cal_tone: Option<(&WaveformConfig, &CalToneSpec)>,
    seed: u64,
) -> Result<MultiChannelCapture> {
    let array = array_signals(tx, rays, geometry)?;
    let noise_power = noise_power_for(tx, &array[0], impairments.snr_db);
    assemble(tx, array, geometry, impairments, cal_tone, noise_power, seed)
}

/// As [`simulate_reception`] with an explicit per-sample noise power; the
/// SNR field of `impairments` is ignored.
pub fn simulate_reception_with_noise_power(
    tx: &TimeDomainSignal,
    rays: &[Ray],
    geometry: &UlaGeometry,
    impairments: &ImpairmentState,
    cal_tone: Option<(&WaveformConfig, &CalToneSpec)>,
    noise_power: f64,
    seed: u64,
) -> Result<MultiChannelCapture> {
    let array = array_signals(tx, rays, geometry)?;
    assemble(tx, array, geometry, impairments, cal_tone, noise_power, seed)
}

fn assemble(
    tx: &TimeDomainSignal,
    array: Vec<Vec<Complex64>>,
    geometry: &UlaGeometry,
    imp: &ImpairmentState,
    cal_tone: Option<(&WaveformConfig, &CalToneSpec)>,
    noise_power: f64,
    seed: u64,
) -> Result<MultiChannelCapture> {
    imp.validate()?;
    let prefix = imp.timing_offset_samples;
    let total = prefix + tx.len();
    let fs = tx.sample_rate_hz;
    let zero = Complex64::new(0.0, 0.0);
    let mut channels = vec![vec![zero; total]; NUM_RX_CHANNELS];

    for (m, sig) in array.into_iter().enumerate() {
        let ch = &mut channels[geometry.element_channel_map[m]];
        for (i, v) in sig.into_iter().enumerate() {
            let n = prefix + i;
            let cfo = Complex64::from_polar(1.0, 2.0 * PI * imp.cfo_hz * n as f64 / fs);
            ch[n] = v * cfo;
        }
    }

    if let Some((config, spec)) = cal_tone {
        let tone = generate_cal_tone(config, spec, total)?;
        for &ch in &spec.channels {
            for (o, t) in channels[ch].iter_mut().zip(&tone.samples) {
                *o += t;
            }
        }
    }

    for (ch, samples) in channels.iter_mut().enumerate() {
        let rot = Complex64::from_polar(1.0, channel_phase(ch, imp.intra_pair_offsets_rad, imp.lo_differential_rad));
        samples.iter_mut().for_each(|z| *z *= rot);
    }

    if noise_power > 0.0 {
        let mut rng = rng_from_seed(seed);
        for samples in channels.iter_mut() {
            for z in samples.iter_mut() {
                *z += complex_gaussian(&mut rng, noise_power);
            }
        }
    }

    MultiChannelCapture::new(
        channels,
        fs,
        CaptureMeta {
            seed,
            ..CaptureMeta::default()
        },
    )
}

/// Offline 1-4 splitter capture: the same tone on all four channels, the
/// receiver phase rotations, and noise at `snr_db` relative to tone power.
pub fn simulate_splitter_capture(
    config: &WaveformConfig,
    spec: &CalToneSpec,
    impairments: &ImpairmentState,
    num_samples: usize,
    seed: u64,
) -> Result<MultiChannelCapture> {
    impairments.validate()?;
    let tone = generate_cal_tone(config, spec, num_samples)?;
    let noise_power = if impairments.snr_db == f64::INFINITY {
        0.0
    } else {
        spec.amplitude * spec.amplitude / 10f64.powf(impairments.snr_db / 10.0)
    };
    let mut rng = rng_from_seed(seed);
    let channels = (0..NUM_RX_CHANNELS)
        .map(|ch| {
            let rot = Complex64::from_polar(
                1.0,
                channel_phase(ch, impairments.intra_pair_offsets_rad, impairments.lo_differential_rad),
            );
            tone.samples
                .iter()
                .map(|&t| {
                    let n = if noise_power > 0.0 {
                        complex_gaussian(&mut rng, noise_power)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    t * rot + n
                })
                .collect()
        })
        .collect();
    MultiChannelCapture::new(
        channels,
        config.sample_rate_hz,
        CaptureMeta {
            config_id: Some(config.config_id),
            carrier_freq_hz: config.carrier_freq_hz,
            timestamp_s: 0.0,
            seed,
        },
    )
}
