use std::f64::consts::PI;

use num_complex::Complex64;

use super::{WaveformConfig, SYMBOLS_PER_SLOT};
use crate::{Error, Result};

pub fn largest_prime_at_most(n: usize) -> Option<usize> {
    (2..=n).rev().find(|&c| is_prime(c))
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Zadoff-Chu base length: the largest prime not exceeding the pilot count.
pub fn zc_length(config: &WaveformConfig) -> usize {
    largest_prime_at_most(config.pilots_per_symbol()).unwrap_or(2)
}

/// Pilot sequence for absolute grid symbol `symbol_index`.
///
/// Zadoff-Chu base sequence cyclically extended to the comb pilot count.
/// The root hops with the SRS symbol ordinal so consecutive SRS symbols (and
/// slots) are not copies of each other; the stored replica then has a single
/// dominant correlation peak.
pub fn generate_srs_sequence(config: &WaveformConfig, symbol_index: usize) -> Result<Vec<Complex64>> {
    let in_slot = symbol_index % SYMBOLS_PER_SLOT;
    let position = config
        .srs_symbols
        .iter()
        .position(|&s| s == in_slot)
        .ok_or_else(|| {
            Error::Usage(format!(
                "symbol {symbol_index} (slot position {in_slot}) carries no SRS"
            ))
        })?;
    let slot = symbol_index / SYMBOLS_PER_SLOT;
    let ordinal = slot * config.srs_symbols.len() + position;

    let n_zc = zc_length(config);
    let root = 1 + (config.zc_root - 1 + ordinal) % (n_zc - 1);
    let len = config.pilots_per_symbol();
    Ok((0..len)
        .map(|n| {
            let m = (n % n_zc) as u64;
            // m(m+1) reduced modulo 2N keeps the phase argument small and exact.
            let k = (root as u64 * m * (m + 1)) % (2 * n_zc as u64);
            Complex64::from_polar(1.0, -PI * k as f64 / n_zc as f64)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{config_from_catalog, ConfigId};

    #[test]
    fn primes() {
        assert_eq!(largest_prime_at_most(798), Some(797));
        assert_eq!(largest_prime_at_most(306), Some(293));
        assert_eq!(largest_prime_at_most(144), Some(139));
        assert_eq!(largest_prime_at_most(390), Some(389));
        assert_eq!(largest_prime_at_most(1), None);
    }

    #[test]
    fn constant_modulus_and_length() {
        for id in ConfigId::ALL {
            let c = config_from_catalog(id);
            for l in 0..4 {
                let s = generate_srs_sequence(&c, l).unwrap();
                assert_eq!(s.len(), c.num_prb * 12 / 2);
                assert!(s.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn deterministic() {
        let c = config_from_catalog(ConfigId::IV);
        assert_eq!(generate_srs_sequence(&c, 2).unwrap(), generate_srs_sequence(&c, 2).unwrap());
    }

    #[test]
    fn rejects_non_srs_symbol() {
        let c = config_from_catalog(ConfigId::I);
        assert!(matches!(generate_srs_sequence(&c, 4), Err(Error::Usage(_))));
        assert!(matches!(generate_srs_sequence(&c, 13), Err(Error::Usage(_))));
        assert!(generate_srs_sequence(&c, 14).is_ok());
    }

    #[test]
    fn symbols_use_distinct_roots() {
        let c = config_from_catalog(ConfigId::III);
        let a = generate_srs_sequence(&c, 0).unwrap();
        let b = generate_srs_sequence(&c, 1).unwrap();
        let d = generate_srs_sequence(&c, 14).unwrap();
        assert_ne!(a, b);
        assert_ne!(a, d);
    }

    /// Direct O(N²) cyclic autocorrelation of the prime-length base sequence.
    #[test]
    fn base_sequence_cyclic_autocorrelation() {
        for id in ConfigId::ALL {
            let c = config_from_catalog(id);
            let n = zc_length(&c);
            for l in [0usize, 3, 15] {
                let s = generate_srs_sequence(&c, l).unwrap();
                let base = &s[..n];
                let corr = |lag: usize| -> f64 {
                    (0..n)
                        .map(|i| base[i] * base[(i + lag) % n].conj())
                        .sum::<Complex64>()
                        .norm()
                };
                let peak = corr(0);
                assert!((peak - n as f64).abs() < 1e-9);
                for lag in 1..n {
                    assert!(corr(lag) <= 0.05 * peak, "{id} lag {lag}");
                }
            }
        }
    }
}
