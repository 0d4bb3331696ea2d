use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::simchannel::{channel_phase, intra_pair_member, CalToneSpec, MultiChannelCapture};
use crate::util::wrap_phase;
use crate::waveform::WaveformConfig;
use crate::{Error, Result};

/// Receiver phase offsets. The intra-pair part comes from an offline splitter
/// run; the LO differential is measured per run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTable {
    /// Channel 1 against 0, channel 3 against 2.
    pub intra_pair_offsets_rad: [f64; 2],
    pub lo_differential_rad: Option<f64>,
    /// Simulated time of the run that produced the table.
    pub timestamp_s: f64,
}

impl CalibrationTable {
    /// All offsets zero; compensation with it is the identity.
    pub fn zero() -> Self {
        Self {
            intra_pair_offsets_rad: [0.0, 0.0],
            lo_differential_rad: Some(0.0),
            timestamp_s: 0.0,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.lo_differential_rad.is_some()
    }

    /// Phase of receiver channel `ch` under this table.
    pub fn channel_phase(&self, ch: usize) -> Result<f64> {
        let lo = self
            .lo_differential_rad
            .ok_or_else(|| Error::Usage("calibration table has no LO differential".into()))?;
        Ok(channel_phase(ch, self.intra_pair_offsets_rad, lo))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "intra_pair_a_rad={}", self.intra_pair_offsets_rad[0]);
        let _ = writeln!(s, "intra_pair_b_rad={}", self.intra_pair_offsets_rad[1]);
        match self.lo_differential_rad {
            Some(v) => {
                let _ = writeln!(s, "lo_differential_rad={v}");
            }
            None => s.push_str("lo_differential_rad=unset\n"),
        }
        let _ = writeln!(s, "timestamp_s={}", self.timestamp_s);
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut intra = [None, None];
        let mut lo = None;
        let mut lo_seen = false;
        let mut ts = 0.0;
        let mut offset = 0u64;
        for line in text.lines() {
            let here = offset;
            offset += line.len() as u64 + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
                offset: here,
                message: format!("expected key=value, got `{line}`"),
            })?;
            let num = |v: &str| -> Result<f64> {
                v.trim().parse::<f64>().map_err(|_| Error::Format {
                    offset: here,
                    message: format!("`{}` is not a number", v.trim()),
                })
            };
            match k.trim() {
                "intra_pair_a_rad" => intra[0] = Some(num(v)?),
                "intra_pair_b_rad" => intra[1] = Some(num(v)?),
                "lo_differential_rad" => {
                    lo_seen = true;
                    lo = if v.trim() == "unset" { None } else { Some(num(v)?) };
                }
                "timestamp_s" => ts = num(v)?,
                other => {
                    return Err(Error::Format {
                        offset: here,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        let missing = |name: &str| Error::Format {
            offset,
            message: format!("missing key `{name}`"),
        };
        let table = Self {
            intra_pair_offsets_rad: [
                intra[0].ok_or_else(|| missing("intra_pair_a_rad"))?,
                intra[1].ok_or_else(|| missing("intra_pair_b_rad"))?,
            ],
            lo_differential_rad: lo,
            timestamp_s: ts,
        };
        if !lo_seen {
            return Err(missing("lo_differential_rad"));
        }
        for p in table.intra_pair_offsets_rad.iter().chain(table.lo_differential_rad.iter()) {
            if (wrap_phase(*p) - p).abs() > 1e-12 {
                return Err(Error::Domain(format!("phase {p} outside (-π, π]")));
            }
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Constant phase of `a` relative to `b`: arg Σ a·conj(b).
///
/// Fails with `LowConfidence` when |Σ a·conj(b)| is under ten times the
/// spread of the per-sample products.
pub fn estimate_pair_phase(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 64 {
        return Err(Error::Usage(format!(
            "pair phase needs equal lengths of at least 64, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let products: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x * y.conj()).collect();
    let sum: Complex64 = products.iter().sum();
    let mean = sum / products.len() as f64;
    let floor = products.iter().map(|p| (p - mean).norm_sqr()).sum::<f64>().sqrt();
    let magnitude = sum.norm();
    if !(magnitude > 0.0) || magnitude < 10.0 * floor {
        return Err(Error::LowConfidence { magnitude, floor });
    }
    Ok(sum.arg())
}

/// Intra-pair offsets from a capture in which all four channels see the same
/// tone. The LO differential is left unset.
pub fn offline_calibrate(capture: &MultiChannelCapture) -> Result<CalibrationTable> {
    capture.validate()?;
    let c = &capture.channels;
    Ok(CalibrationTable {
        intra_pair_offsets_rad: [estimate_pair_phase(&c[1], &c[0])?, estimate_pair_phase(&c[3], &c[2])?],
        lo_differential_rad: None,
        timestamp_s: capture.meta.timestamp_s,
    })
}

/// Complex tone amplitudes on the two tone channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneMeasurement {
    pub amplitudes: [Complex64; 2],
    /// Samples that entered the projection.
    pub samples_used: usize,
}

/// Single-bin DFT projection of the tone channels over FFT-sized blocks.
///
/// Only blocks whose energy on a tone-free channel is within twice the
/// quietest block are used, which keeps SRS symbols out of the estimate.
pub fn measure_cal_tone(
    capture: &MultiChannelCapture,
    config: &WaveformConfig,
    spec: &CalToneSpec,
) -> Result<ToneMeasurement> {
    capture.validate()?;
    spec.validate(config)?;
    let n = config.fft_size;
    let blocks = capture.num_samples() / n;
    if blocks == 0 {
        return Err(Error::Truncation {
            needed: n,
            available: capture.num_samples(),
        });
    }
    let gate_ch = (0..capture.channels.len())
        .find(|c| !spec.channels.contains(c))
        .expect("four channels, two tone channels");
    let energy: Vec<f64> = (0..blocks)
        .map(|b| capture.channels[gate_ch][b * n..(b + 1) * n].iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let e_min = energy.iter().copied().fold(f64::INFINITY, f64::min);
    let e_max = energy.iter().copied().fold(0.0, f64::max);
    let limit = 2.0 * e_min + 1e-12 * e_max;
    let kept: Vec<usize> = (0..blocks).filter(|&b| energy[b] <= limit).collect();

    let bin = spec.bin(config) as u64;
    let twiddle: Vec<Complex64> = (0..n as u64)
        .map(|i| Complex64::from_polar(1.0, -2.0 * PI * ((bin * i) % n as u64) as f64 / n as f64))
        .collect();
    let mut amplitudes = [Complex64::new(0.0, 0.0); 2];
    for (slot, &ch) in spec.channels.iter().enumerate() {
        let x = &capture.channels[ch];
        let mut acc = Complex64::new(0.0, 0.0);
        let mut power = 0.0;
        for &b in &kept {
            for (i, t) in twiddle.iter().enumerate() {
                let v = x[b * n + i];
                acc += v * t;
                power += v.norm_sqr();
            }
        }
        let used = (kept.len() * n) as f64;
        let amp = acc / used;
        let residual = (power / used - amp.norm_sqr()).max(0.0);
        // integrated tone-to-residual ratio of at least 10 dB
        if !(amp.norm_sqr() > 0.0) || amp.norm_sqr() * used < 10.0 * residual {
            return Err(Error::Calibration(format!(
                "calibration tone too weak on channel {ch} (|a|² = {:.3e}, residual {:.3e})",
                amp.norm_sqr(),
                residual
            )));
        }
        amplitudes[slot] = amp;
    }
    Ok(ToneMeasurement {
        amplitudes,
        samples_used: kept.len() * n,
    })
}

/// Fills the LO differential of `table` from the tone on the two tone
/// channels, removing their stored intra-pair contributions.
pub fn runtime_calibrate(
    capture: &MultiChannelCapture,
    table: &CalibrationTable,
    config: &WaveformConfig,
    spec: &CalToneSpec,
) -> Result<CalibrationTable> {
    let tone = measure_cal_tone(capture, config, spec)?;
    Ok(lo_from_tone(&tone, table, spec, capture.meta.timestamp_s))
}

pub(crate) fn lo_from_tone(
    tone: &ToneMeasurement,
    table: &CalibrationTable,
    spec: &CalToneSpec,
    timestamp_s: f64,
) -> CalibrationTable {
    let measured = (tone.amplitudes[1] * tone.amplitudes[0].conj()).arg();
    let intra = |ch: usize| {
        let (pair, rotated) = intra_pair_member(ch);
        if rotated {
            table.intra_pair_offsets_rad[pair]
        } else {
            0.0
        }
    };
    let lo = wrap_phase(measured - intra(spec.channels[1]) + intra(spec.channels[0]));
    CalibrationTable {
        lo_differential_rad: Some(lo),
        timestamp_s,
        ..*table
    }
}

/// Subtracts the measured tone from its two channels.
pub fn cancel_cal_tone(
    capture: &MultiChannelCapture,
    config: &WaveformConfig,
    spec: &CalToneSpec,
    tone: &ToneMeasurement,
) -> MultiChannelCapture {
    let mut out = capture.clone();
    let n = config.fft_size as u64;
    let bin = spec.bin(config) as u64;
    for (slot, &ch) in spec.channels.iter().enumerate() {
        let a = tone.amplitudes[slot];
        for (i, z) in out.channels[ch].iter_mut().enumerate() {
            *z -= a * Complex64::from_polar(1.0, 2.0 * PI * ((bin * i as u64) % n) as f64 / n as f64);
        }
    }
    out
}

/// Derotates every channel by its calibrated phase.
pub fn apply_phase_compensation(
    capture: &MultiChannelCapture,
    table: &CalibrationTable,
) -> Result<MultiChannelCapture> {
    let mut out = capture.clone();
    for (ch, samples) in out.channels.iter_mut().enumerate() {
        let phase = table.channel_phase(ch)?;
        if phase != 0.0 {
            let rot = Complex64::from_polar(1.0, -phase);
            samples.iter_mut().for_each(|z| *z *= rot);
        }
    }
    Ok(out)
}
