use num_complex::Complex64;
use rand::Rng;

use super::{steering, CMatrix};
use crate::simchannel::UlaGeometry;
use crate::util::complex_gaussian;

/// M×K snapshots of independent unit-power Gaussian sources plus white noise
/// at `snr_db` per source.
pub(crate) fn sources_snapshots(
    angles: &[f64],
    snr_db: f64,
    k: usize,
    rng: &mut impl Rng,
    geometry: &UlaGeometry,
) -> CMatrix {
    let m = geometry.num_elements;
    let sigma2 = 10f64.powf(-snr_db / 10.0);
    let steer: Vec<_> = angles.iter().map(|&a| steering(a, geometry)).collect();
    let mut x = CMatrix::zeros(m, k);
    for col in 0..k {
        for a in &steer {
            let s = complex_gaussian(rng, 1.0);
            for row in 0..m {
                x[(row, col)] += a[row] * s;
            }
        }
        for row in 0..m {
            x[(row, col)] += complex_gaussian(rng, sigma2);
        }
    }
    x
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
