use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Normal-CP slot length.
pub const SYMBOLS_PER_SLOT: usize = 14;

/// Reference rate at which the CP lengths of the 3GPP numerology are defined.
const REFERENCE_RATE_HZ: f64 = 30.72e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConfigId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl ConfigId {
    pub const ALL: [ConfigId; 8] = [
        ConfigId::I,
        ConfigId::II,
        ConfigId::III,
        ConfigId::IV,
        ConfigId::V,
        ConfigId::VI,
        ConfigId::VII,
        ConfigId::VIII,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConfigId::I => "I",
            ConfigId::II => "II",
            ConfigId::III => "III",
            ConfigId::IV => "IV",
            ConfigId::V => "V",
            ConfigId::VI => "VI",
            ConfigId::VII => "VII",
            ConfigId::VIII => "VIII",
        }
    }

    /// (carrier GHz, SCS kHz, bandwidth MHz) row of the catalog.
    fn row(self) -> (f64, f64, f64) {
        match self {
            ConfigId::I => (2.4e9, 30e3, 20e6),
            ConfigId::II => (2.4e9, 30e3, 50e6),
            ConfigId::III => (3.5e9, 30e3, 20e6),
            ConfigId::IV => (3.5e9, 30e3, 50e6),
            ConfigId::V => (3.5e9, 60e3, 20e6),
            ConfigId::VI => (3.5e9, 60e3, 50e6),
            ConfigId::VII => (5.8e9, 60e3, 20e6),
            ConfigId::VIII => (5.8e9, 60e3, 50e6),
        }
    }
}

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConfigId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        ConfigId::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == up)
            .ok_or_else(|| Error::Config(format!("unknown waveform configuration '{s}'")))
    }
}

/// One catalog entry with its derived OFDM numerology.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformConfig {
    pub config_id: ConfigId,
    pub carrier_freq_hz: f64,
    pub scs_hz: f64,
    pub bandwidth_hz: f64,
    pub sample_rate_hz: f64,
    pub fft_size: usize,
    /// CP length of every symbol in one half-subframe; the pattern repeats.
    /// Index 0 carries the long CP.
    pub cp_lengths: Vec<usize>,
    pub num_prb: usize,
    pub comb_ktc: usize,
    /// Symbol indices within a slot that carry SRS.
    pub srs_symbols: Vec<usize>,
    pub comb_offset: usize,
    /// Base Zadoff-Chu root; hopped per SRS symbol.
    pub zc_root: usize,
}

/// Builds the fully derived configuration for a catalog identifier.
pub fn config_from_catalog(config_id: ConfigId) -> WaveformConfig {
    let (carrier, scs, bw) = config_id.row();
    // Transmission bandwidth tables for numerologies 1 and 2.
    let (fft_size, num_prb) = match (scs as u64, bw as u64) {
        (30_000, 20_000_000) => (1024, 51),
        (30_000, 50_000_000) => (2048, 133),
        (60_000, 20_000_000) => (512, 24),
        (60_000, 50_000_000) => (1024, 65),
        _ => unreachable!("catalog rows are fixed"),
    };
    let sample_rate = scs * fft_size as f64;
    let mu = (scs / 15e3).log2().round() as u32;
    let short_cp = 144 * fft_size / 2048;
    let long_extra = (16.0 * sample_rate / REFERENCE_RATE_HZ).round() as usize;
    let per_half_subframe = 7 * (1usize << mu);
    let cp_lengths = (0..per_half_subframe)
        .map(|l| if l == 0 { short_cp + long_extra } else { short_cp })
        .collect();
    WaveformConfig {
        config_id,
        carrier_freq_hz: carrier,
        scs_hz: scs,
        bandwidth_hz: bw,
        sample_rate_hz: sample_rate,
        fft_size,
        cp_lengths,
        num_prb,
        comb_ktc: 2,
        srs_symbols: vec![0, 1, 2, 3],
        comb_offset: 0,
        zc_root: 25,
    }
}

impl WaveformConfig {
    pub fn with_comb_offset(mut self, offset: usize) -> Result<Self> {
        if offset >= self.comb_ktc {
            return Err(Error::Config(format!(
                "comb offset {offset} outside [0, {})",
                self.comb_ktc
            )));
        }
        self.comb_offset = offset;
        Ok(self)
    }

    pub fn with_zc_root(mut self, root: usize) -> Result<Self> {
        let n = super::zc_length(&self);
        if root == 0 || root >= n {
            return Err(Error::Config(format!("ZC root {root} outside [1, {n})")));
        }
        self.zc_root = root;
        Ok(self)
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_prb * 12
    }

    pub fn pilots_per_symbol(&self) -> usize {
        self.num_subcarriers() / self.comb_ktc
    }

    /// Numerology index μ (SCS = 15 kHz · 2^μ).
    pub fn numerology(&self) -> u32 {
        (self.scs_hz / 15e3).log2().round() as u32
    }

    pub fn wavelength_m(&self) -> f64 {
        299_792_458.0 / self.carrier_freq_hz
    }

    /// CP length of absolute symbol `symbol` counted from a half-subframe boundary.
    pub fn cp_len(&self, symbol: usize) -> usize {
        self.cp_lengths[symbol % self.cp_lengths.len()]
    }

    /// Sample offset of the start (CP included) of `symbol` from the frame start.
    pub fn symbol_start(&self, symbol: usize) -> usize {
        (0..symbol).map(|l| self.fft_size + self.cp_len(l)).sum()
    }

    /// Number of samples spanned by the first `num_symbols` symbols.
    pub fn samples_for_symbols(&self, num_symbols: usize) -> usize {
        self.symbol_start(num_symbols)
    }

    pub fn samples_per_slots(&self, num_slots: usize) -> usize {
        self.samples_for_symbols(num_slots * SYMBOLS_PER_SLOT)
    }

    pub fn is_srs_symbol(&self, symbol: usize) -> bool {
        self.srs_symbols.contains(&(symbol % SYMBOLS_PER_SLOT))
    }

    /// Closed-form pilot predicate for (subcarrier, absolute symbol).
    pub fn is_pilot(&self, subcarrier: usize, symbol: usize) -> bool {
        self.is_srs_symbol(symbol) && subcarrier % self.comb_ktc == self.comb_offset
    }

    /// FFT bin holding grid subcarrier `k` under centered mapping.
    pub fn subcarrier_bin(&self, k: usize) -> usize {
        let n = self.fft_size as isize;
        let f = k as isize - (self.num_subcarriers() / 2) as isize;
        f.rem_euclid(n) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_rows_match_table() {
        let c = config_from_catalog(ConfigId::II);
        assert_eq!((c.carrier_freq_hz, c.scs_hz, c.bandwidth_hz), (2.4e9, 30e3, 50e6));
        let c = config_from_catalog(ConfigId::VIII);
        assert_eq!((c.carrier_freq_hz, c.scs_hz, c.bandwidth_hz), (5.8e9, 60e3, 50e6));
    }

    #[test]
    fn config_ii_numerology() {
        let c = config_from_catalog(ConfigId::II);
        assert_eq!(c.fft_size, 2048);
        assert_eq!(c.sample_rate_hz, 61.44e6);
        assert_eq!(c.num_prb, 133);
        assert!(c.num_prb as f64 * 12.0 * c.scs_hz <= c.bandwidth_hz);
    }

    #[test]
    fn catalog_invariants() {
        assert_eq!(ConfigId::ALL.len(), 8);
        for id in ConfigId::ALL {
            let c = config_from_catalog(id);
            assert_eq!(c.sample_rate_hz, c.scs_hz * c.fft_size as f64);
            assert!(c.num_prb as f64 * 12.0 * c.scs_hz <= c.bandwidth_hz);
            assert!(c.sample_rate_hz == 30.72e6 || c.sample_rate_hz == 61.44e6);
            assert_eq!(c.comb_ktc, 2);
            assert_eq!(c.srs_symbols, vec![0, 1, 2, 3]);
            assert!(c.num_subcarriers() <= c.fft_size);
        }
    }

    #[test]
    fn half_subframe_is_half_millisecond() {
        for id in ConfigId::ALL {
            let c = config_from_catalog(id);
            let n = c.cp_lengths.len();
            let samples = c.samples_for_symbols(n);
            assert_eq!(samples as f64, c.sample_rate_hz * 0.5e-3, "{id}");
        }
    }

    #[test]
    fn parse_ids() {
        assert_eq!("viii".parse::<ConfigId>().unwrap(), ConfigId::VIII);
        assert!(matches!("IX".parse::<ConfigId>(), Err(Error::Config(_))));
    }

    #[test]
    fn root_validation() {
        let c = config_from_catalog(ConfigId::V);
        assert!(c.clone().with_zc_root(0).is_err());
        assert!(c.clone().with_zc_root(139).is_err());
        assert_eq!(c.with_zc_root(7).unwrap().zc_root, 7);
    }
}
