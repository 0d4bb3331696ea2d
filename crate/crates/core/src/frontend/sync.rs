use num_complex::Complex64;

use crate::simchannel::MultiChannelCapture;
use crate::util::{fft_plan, ifft_plan};
use crate::waveform::{TimeDomainSignal, WaveformConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncResult {
    pub start_offset: usize,
    /// Normalised correlation at the peak, in [0, 1].
    pub peak_metric: f64,
    /// Filled by the CFO stage; zero straight out of [`timing_sync`].
    pub cfo_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncOptions {
    /// Minimum accepted peak metric.
    pub threshold: f64,
    pub reference_channel: usize,
    /// The replica is correlated coherently in segments of this length and
    /// the segment magnitudes are summed, which tolerates a CFO that rotates
    /// the phase across the replica.
    pub segment_len: usize,
}

impl Default for SyncOptions {
    fn default() -> Self {
        Self {
            threshold: 0.2,
            reference_channel: 1,
            segment_len: 1024,
        }
    }
}

impl SyncOptions {
    /// One OFDM symbol per segment.
    pub fn for_config(config: &WaveformConfig) -> Self {
        Self {
            segment_len: config.fft_size,
            ..Self::default()
        }
    }
}

/// Replica cross-correlation on channel 1 with default options.
pub fn timing_sync(capture: &MultiChannelCapture, replica: &TimeDomainSignal) -> Result<SyncResult> {
    timing_sync_with(capture, replica, &SyncOptions::default())
}

/// Start of the replica in the capture: the lag maximising Σ_seg |c_seg(τ)|.
/// The metric is Σ_seg |c_seg| / Σ_seg √(E_replica,seg · E_capture,seg).
pub fn timing_sync_with(
    capture: &MultiChannelCapture,
    replica: &TimeDomainSignal,
    options: &SyncOptions,
) -> Result<SyncResult> {
    capture.validate()?;
    let x = capture
        .channels
        .get(options.reference_channel)
        .ok_or_else(|| Error::Usage(format!("no channel {}", options.reference_channel)))?;
    let r = &replica.samples;
    if r.is_empty() || r.len() > x.len() {
        return Err(Error::Usage(format!(
            "replica of {} samples does not fit a capture of {}",
            r.len(),
            x.len()
        )));
    }
    let seg = options.segment_len.max(1);
    let lags = x.len() - r.len() + 1;
    let fft_len = (x.len() + seg).next_power_of_two();
    let zero = Complex64::new(0.0, 0.0);

    let mut xf = vec![zero; fft_len];
    xf[..x.len()].copy_from_slice(x);
    let fft = fft_plan(fft_len);
    let ifft = ifft_plan(fft_len);
    fft.process(&mut xf);

    let mut cum = Vec::with_capacity(x.len() + 1);
    cum.push(0.0);
    for z in x {
        cum.push(cum.last().unwrap() + z.norm_sqr());
    }
    let window_energy = |start: usize, len: usize| (cum[start + len] - cum[start]).max(0.0);

    let mut total = vec![0.0f64; lags];
    let mut segments = Vec::new();
    let mut buf = vec![zero; fft_len];
    for start in (0..r.len()).step_by(seg) {
        let part = &r[start..(start + seg).min(r.len())];
        let e_rep: f64 = part.iter().map(|z| z.norm_sqr()).sum();
        if e_rep == 0.0 {
            continue;
        }
        buf.iter_mut().for_each(|z| *z = zero);
        buf[..part.len()].copy_from_slice(part);
        fft.process(&mut buf);
        for (b, xv) in buf.iter_mut().zip(&xf) {
            *b = xv * b.conj();
        }
        ifft.process(&mut buf);
        // circular correlation index start + τ holds the lag-τ segment sum
        let scale = 1.0 / fft_len as f64;
        for (tau, t) in total.iter_mut().enumerate() {
            *t += buf[start + tau].norm() * scale;
        }
        segments.push((start, part.len(), e_rep));
    }
    if segments.is_empty() {
        return Err(Error::Usage("replica carries no energy".into()));
    }

    let (best, peak) = total
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let norm: f64 = segments
        .iter()
        .map(|&(start, len, e_rep)| (e_rep * window_energy(best + start, len)).sqrt())
        .sum();
    let peak_metric = if norm > 0.0 { (peak / norm).min(1.0) } else { 0.0 };
    if peak_metric < options.threshold {
        return Err(Error::SyncFailure {
            metric: peak_metric,
            threshold: options.threshold,
        });
    }
    Ok(SyncResult {
        start_offset: best,
        peak_metric,
        cfo_hz: 0.0,
    })
}
