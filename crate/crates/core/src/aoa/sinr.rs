use crate::waveform::{ResourceGrid, WaveformConfig};
use crate::{Error, Result};

/// Reporting floor for the −∞ sentinel.
pub const SINR_FLOOR_DB: f64 = -40.0;

/// SINR from a demodulated grid: N̂ is the mean power of the comb-empty
/// positions of SRS symbols (minus `excluded_subcarriers`), Ŝ the mean pilot
/// power minus N̂. Returns 10·log10(Ŝ/N̂), or −∞ when Ŝ ≤ 0.
pub fn sinr_estimate(grid: &ResourceGrid, config: &WaveformConfig, excluded_subcarriers: &[usize]) -> Result<f64> {
    let (mut pilot, mut np) = (0.0, 0usize);
    let (mut empty, mut ne) = (0.0, 0usize);
    for l in (0..grid.num_symbols()).filter(|&l| config.is_srs_symbol(l)) {
        for (k, z) in grid.symbol(l).iter().enumerate() {
            if config.is_pilot(k, l) {
                pilot += z.norm_sqr();
                np += 1;
            } else if !excluded_subcarriers.contains(&k) {
                empty += z.norm_sqr();
                ne += 1;
            }
        }
    }
    if np == 0 {
        return Err(Error::Usage("grid holds no SRS symbol".into()));
    }
    if ne == 0 {
        return Err(Error::Usage("grid has no empty positions".into()));
    }
    let noise = empty / ne as f64;
    let signal = pilot / np as f64 - noise;
    if signal <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}

/// Clamps the sentinel and anything below the floor to −40 dB.
pub fn reported_sinr_db(sinr_db: f64) -> f64 {
    sinr_db.max(SINR_FLOOR_DB)
}
