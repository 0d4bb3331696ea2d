use num_complex::Complex64;

use super::spectrum::check_geometry;
use super::{angle_from_phase, poly_roots, CMatrix, Candidates, SpatialCovariance};
use crate::simchannel::UlaGeometry;
use crate::{Error, Result};

/// Coefficients (ascending) of z^(M−1)·a(z)ᴴ·C·a(z) with a(z) = [1, z, …]:
/// the coefficient of z^(l+M−1) is the sum of the l-th diagonal of C.
pub fn root_music_polynomial(noise_projector: &CMatrix) -> Vec<Complex64> {
    let m = noise_projector.nrows();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * m - 1];
    for i in 0..m {
        for j in 0..m {
            coeffs[j + m - 1 - i] += noise_projector[(i, j)];
        }
    }
    coeffs
}

/// Of the M−1 roots inside (or on) the unit circle, the `order` nearest to
/// it that map to a visible angle.
pub fn root_music(cov: &SpatialCovariance, order: usize, geometry: &UlaGeometry) -> Result<Candidates> {
    check_geometry(cov, geometry)?;
    let eig = cov.eigen()?;
    let projector = cov.noise_projector(&eig, order)?;
    let m = cov.dim();
    let mut roots = poly_roots(&root_music_polynomial(&projector))?;
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    roots.truncate(m - 1);
    roots.sort_by(|a, b| (1.0 - a.norm()).abs().total_cmp(&(1.0 - b.norm()).abs()));

    let mut angles = Vec::with_capacity(order);
    let mut last_err = None;
    for r in roots {
        if angles.len() == order {
            break;
        }
        match angle_from_phase(r.arg(), geometry.element_spacing_wavelengths) {
            Ok(a) => angles.push(a),
            Err(e) => last_err = Some(e),
        }
    }
    if angles.len() < order {
        return Err(last_err.unwrap_or_else(|| Error::InvalidRoot("not enough roots".into())));
    }
    Ok(Candidates {
        angles_deg: angles,
        delays_samples: None,
        low_confidence: cov.is_isotropic(&eig),
    })
}
