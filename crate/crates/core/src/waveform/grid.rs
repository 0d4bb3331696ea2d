use num_complex::Complex64;

use super::{generate_srs_sequence, WaveformConfig, SYMBOLS_PER_SLOT};
use crate::{Error, Result};

/// Subcarrier × symbol grid, stored symbol-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    num_subcarriers: usize,
    num_symbols: usize,
    data: Vec<Complex64>,
    used_mask: Vec<bool>,
}

impl ResourceGrid {
    pub fn zeros(num_subcarriers: usize, num_symbols: usize) -> Self {
        Self {
            num_subcarriers,
            num_symbols,
            data: vec![Complex64::new(0.0, 0.0); num_subcarriers * num_symbols],
            used_mask: vec![false; num_subcarriers * num_symbols],
        }
    }

    /// Empty grid whose mask follows the SRS pattern of `config`.
    pub fn with_srs_mask(config: &WaveformConfig, num_symbols: usize) -> Self {
        let mut g = Self::zeros(config.num_subcarriers(), num_symbols);
        for l in 0..num_symbols {
            for k in 0..g.num_subcarriers {
                g.used_mask[l * g.num_subcarriers + k] = config.is_pilot(k, l);
            }
        }
        g
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn num_symbols(&self) -> usize {
        self.num_symbols
    }

    pub fn get(&self, subcarrier: usize, symbol: usize) -> Complex64 {
        self.data[symbol * self.num_subcarriers + subcarrier]
    }

    pub fn set(&mut self, subcarrier: usize, symbol: usize, value: Complex64) {
        self.data[symbol * self.num_subcarriers + subcarrier] = value;
    }

    pub fn is_used(&self, subcarrier: usize, symbol: usize) -> bool {
        self.used_mask[symbol * self.num_subcarriers + subcarrier]
    }

    pub fn set_used(&mut self, subcarrier: usize, symbol: usize, used: bool) {
        self.used_mask[symbol * self.num_subcarriers + subcarrier] = used;
    }

    /// Column of one symbol.
    pub fn symbol(&self, symbol: usize) -> &[Complex64] {
        let n = self.num_subcarriers;
        &self.data[symbol * n..(symbol + 1) * n]
    }

    pub fn symbol_mut(&mut self, symbol: usize) -> &mut [Complex64] {
        let n = self.num_subcarriers;
        &mut self.data[symbol * n..(symbol + 1) * n]
    }

    pub fn used_count(&self) -> usize {
        self.used_mask.iter().filter(|&&u| u).count()
    }

    /// Symbols containing at least one used entry.
    pub fn active_symbols(&self) -> usize {
        (0..self.num_symbols)
            .filter(|&l| (0..self.num_subcarriers).any(|k| self.is_used(k, l)))
            .count()
    }
}

/// SRS grid spanning `num_slots` slots; pilots on the comb of the SRS symbols.
pub fn build_srs_grid(config: &WaveformConfig, num_slots: usize) -> Result<ResourceGrid> {
    if num_slots == 0 {
        return Err(Error::Usage("grid needs at least one slot".into()));
    }
    let num_symbols = num_slots * SYMBOLS_PER_SLOT;
    let mut grid = ResourceGrid::with_srs_mask(config, num_symbols);
    for l in (0..num_symbols).filter(|&l| config.is_srs_symbol(l)) {
        let seq = generate_srs_sequence(config, l)?;
        let ks = (config.comb_offset..config.num_subcarriers()).step_by(config.comb_ktc);
        for (k, v) in ks.zip(seq) {
            grid.set(k, l, v);
        }
    }
    Ok(grid)
}
