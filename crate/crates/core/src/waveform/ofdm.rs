use num_complex::Complex64;

use super::{ResourceGrid, WaveformConfig};
use crate::util::{fft_plan, ifft_plan};
use crate::{Error, Result};

/// Complex baseband samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    /// Fraction of the FFT bins that carry energy during active symbols.
    /// Used to express noise levels per resource element; 1.0 for
    /// signals that are not OFDM.
    pub occupied_fraction: f64,
}

impl TimeDomainSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        Self {
            samples,
            sample_rate_hz,
            occupied_fraction: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// CP-OFDM modulation with a unitary transform: per symbol the grid column
/// is centre-mapped into the FFT bins, inverse transformed and prefixed with
/// its cyclic prefix.
pub fn ofdm_modulate(grid: &ResourceGrid, config: &WaveformConfig) -> Result<TimeDomainSignal> {
    let n = config.fft_size;
    if grid.num_subcarriers() > n {
        return Err(Error::Config(format!(
            "grid has {} subcarriers but FFT size is {n}",
            grid.num_subcarriers()
        )));
    }
    let ifft = ifft_plan(n);
    let scale = 1.0 / (n as f64).sqrt();
    let half = grid.num_subcarriers() / 2;
    let mut out = Vec::with_capacity(config.samples_for_symbols(grid.num_symbols()));
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for l in 0..grid.num_symbols() {
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (k, &v) in grid.symbol(l).iter().enumerate() {
            let bin = (k as isize - half as isize).rem_euclid(n as isize) as usize;
            buf[bin] = v;
        }
        ifft.process(&mut buf);
        buf.iter_mut().for_each(|z| *z *= scale);
        let cp = config.cp_len(l);
        out.extend_from_slice(&buf[n - cp..]);
        out.extend_from_slice(&buf);
    }
    let active = grid.active_symbols();
    let occupied_fraction = if active > 0 {
        grid.used_count() as f64 / (active * n) as f64
    } else {
        1.0
    };
    Ok(TimeDomainSignal {
        samples: out,
        sample_rate_hz: config.sample_rate_hz,
        occupied_fraction,
    })
}

/// Demodulates every full symbol after `start_offset`.
pub fn ofdm_demodulate(
    samples: &[Complex64],
    config: &WaveformConfig,
    start_offset: usize,
) -> Result<ResourceGrid> {
    let available = samples.len().saturating_sub(start_offset);
    let mut count = 0;
    while config.samples_for_symbols(count + 1) <= available {
        count += 1;
    }
    ofdm_demodulate_symbols(samples, config, start_offset, count)
}

/// Demodulates exactly `num_symbols` symbols starting at `start_offset`.
pub fn ofdm_demodulate_symbols(
    samples: &[Complex64],
    config: &WaveformConfig,
    start_offset: usize,
    num_symbols: usize,
) -> Result<ResourceGrid> {
    let needed = start_offset + config.samples_for_symbols(num_symbols.max(1));
    if num_symbols == 0 || needed > samples.len() {
        return Err(Error::Truncation {
            needed,
            available: samples.len(),
        });
    }
    let n = config.fft_size;
    let fft = fft_plan(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut grid = ResourceGrid::with_srs_mask(config, num_symbols);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for l in 0..num_symbols {
        let begin = start_offset + config.symbol_start(l) + config.cp_len(l);
        buf.copy_from_slice(&samples[begin..begin + n]);
        fft.process(&mut buf);
        let column = grid.symbol_mut(l);
        for (k, slot) in column.iter_mut().enumerate() {
            *slot = buf[config.subcarrier_bin(k)] * scale;
        }
    }
    Ok(grid)
}
