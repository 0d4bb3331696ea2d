//! SRS waveform generation: the eight-entry configuration catalog, comb-2
//! Zadoff-Chu pilots, the resource grid and CP-OFDM (de)modulation.

mod catalog;
mod grid;
mod ofdm;
mod srs;

pub use catalog::{config_from_catalog, ConfigId, WaveformConfig, SYMBOLS_PER_SLOT};
pub use grid::{build_srs_grid, ResourceGrid};
pub use ofdm::{ofdm_demodulate, ofdm_demodulate_symbols, ofdm_modulate, TimeDomainSignal};
pub use srs::{generate_srs_sequence, largest_prime_at_most, zc_length};
