use std::f64::consts::PI;

use num_complex::Complex64;

use super::{steering, CMatrix};
use crate::simchannel::UlaGeometry;
use crate::waveform::{generate_srs_sequence, ResourceGrid, WaveformConfig};
use crate::{Error, Result};

/// Pilot-divided channel estimates, indexed `[symbol][pilot][element]`.
/// Consecutive pilots are `subcarrier_step` subcarriers apart.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservations {
    pub values: Vec<Vec<Vec<Complex64>>>,
    pub subcarrier_step: usize,
    pub fft_size: usize,
}

impl PilotObservations {
    /// Extracts every SRS symbol from one demodulated grid per array element.
    pub fn from_grids(grids: &[ResourceGrid], config: &WaveformConfig) -> Result<Self> {
        let first = grids.first().ok_or_else(|| Error::Usage("no element grids".into()))?;
        if grids.iter().any(|g| g.num_symbols() != first.num_symbols()) {
            return Err(Error::Usage("element grids differ in symbol count".into()));
        }
        let pilots = config.pilots_per_symbol();
        let mut values = Vec::new();
        for l in (0..first.num_symbols()).filter(|&l| config.is_srs_symbol(l)) {
            let seq = generate_srs_sequence(config, l)?;
            let symbol = (0..pilots)
                .map(|p| {
                    let k = config.comb_offset + config.comb_ktc * p;
                    grids.iter().map(|g| g.get(k, l) * seq[p].conj()).collect()
                })
                .collect();
            values.push(symbol);
        }
        if values.is_empty() {
            return Err(Error::InsufficientData("grid holds no SRS symbol".into()));
        }
        Ok(Self {
            values,
            subcarrier_step: config.comb_ktc,
            fft_size: config.fft_size,
        })
    }

    /// Noiseless observations of `rays` given as (angle°, delay in samples,
    /// gain): H = Σ g·a(θ)·exp(−j2π·f·d/N) with f the centred subcarrier index.
    pub fn from_rays(
        rays: &[(f64, f64, Complex64)],
        geometry: &UlaGeometry,
        config: &WaveformConfig,
        num_symbols: usize,
    ) -> Result<Self> {
        let half = (config.num_subcarriers() / 2) as f64;
        let steer = rays
            .iter()
            .map(|&(a, _, _)| crate::simchannel::steering_vector(a, geometry).map(|_| steering(a, geometry)))
            .collect::<Result<Vec<_>>>()?;
        let symbol: Vec<Vec<Complex64>> = (0..config.pilots_per_symbol())
            .map(|p| {
                let f = (config.comb_offset + config.comb_ktc * p) as f64 - half;
                (0..geometry.num_elements)
                    .map(|m| {
                        rays.iter()
                            .zip(&steer)
                            .map(|(&(_, d, g), a)| {
                                g * a[m] * Complex64::from_polar(1.0, -2.0 * PI * f * d / config.fft_size as f64)
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            values: vec![symbol; num_symbols],
            subcarrier_step: config.comb_ktc,
            fft_size: config.fft_size,
        })
    }

    pub fn num_symbols(&self) -> usize {
        self.values.len()
    }

    pub fn num_pilots(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn num_elements(&self) -> usize {
        self.values.first().and_then(|s| s.first()).map_or(0, Vec::len)
    }

    /// M × (symbols·pilots) matrix, one column per pilot resource element.
    pub fn snapshot_matrix(&self) -> CMatrix {
        let m = self.num_elements();
        let cols: Vec<&Vec<Complex64>> = self.values.iter().flatten().collect();
        CMatrix::from_fn(m, cols.len(), |r, c| cols[c][r])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simchannel::{simulate_reception, ImpairmentState, Ray};
    use crate::waveform::{build_srs_grid, config_from_catalog, ofdm_demodulate_symbols, ofdm_modulate, ConfigId};

    /// Observations from a simulated noiseless capture match the closed-form
    /// model.
    #[test]
    fn grids_match_model() {
        let cfg = config_from_catalog(ConfigId::V);
        let g = UlaGeometry::default();
        let tx = ofdm_modulate(&build_srs_grid(&cfg, 1).unwrap(), &cfg).unwrap();
        let gain = Complex64::new(0.6, -0.3);
        let ray = Ray::new(21.0, 4.0, gain).unwrap();
        let cap = simulate_reception(&tx, &[ray], &g, &ImpairmentState::ideal(), None, 0).unwrap();
        let grids: Vec<_> = cap
            .ula_channels(&g)
            .into_iter()
            .map(|x| ofdm_demodulate_symbols(x, &cfg, 0, 14).unwrap())
            .collect();
        let obs = PilotObservations::from_grids(&grids, &cfg).unwrap();
        assert_eq!(obs.num_symbols(), 4);
        assert_eq!(obs.num_pilots(), cfg.pilots_per_symbol());
        assert_eq!(obs.num_elements(), 3);
        let model = PilotObservations::from_rays(&[(21.0, 4.0, gain)], &g, &cfg, 4).unwrap();
        // integer delay inside the CP: exact apart from the first symbol's
        // leading samples, which are still zero
        for s in 1..4 {
            for p in 0..obs.num_pilots() {
                for m in 0..3 {
                    assert!((obs.values[s][p][m] - model.values[s][p][m]).norm() < 1e-9);
                }
            }
        }
        assert_eq!(obs.snapshot_matrix().ncols(), 4 * cfg.pilots_per_symbol());
    }
}
