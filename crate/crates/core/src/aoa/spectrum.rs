use nalgebra::Cholesky;
use num_complex::Complex64;

use super::{steering, CMatrix, Candidates, SpatialCovariance};
use crate::simchannel::UlaGeometry;
use crate::{Error, Result};

/// Minimum separation of fill-in candidates from already chosen ones.
const FILL_SEPARATION_DEG: f64 = 5.0;
/// Relative spread below which a spectrum counts as flat.
const FLAT_TOLERANCE: f64 = 1e-6;

/// Pseudo-spectrum P(θ) = 1/D(θ) on the scan grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub angles_deg: Vec<f64>,
    /// D(θ); peaks of P are minima of D.
    pub denominators: Vec<f64>,
    pub step_deg: f64,
}

impl Spectrum {
    pub fn power(&self, i: usize) -> f64 {
        1.0 / self.denominators[i]
    }

    pub fn is_flat(&self) -> bool {
        let lo = self.denominators.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.denominators.iter().copied().fold(0.0, f64::max);
        // P spread relative to its maximum: (1/lo − 1/hi)/(1/lo)
        hi <= 0.0 || (hi - lo) / hi <= FLAT_TOLERANCE
    }

    /// The `order` strongest local maxima, parabolically refined; filled
    /// with the strongest remaining grid points at least 5° from every chosen
    /// angle when there are fewer maxima than `order`.
    pub fn peaks(&self, order: usize) -> Candidates {
        let d = &self.denominators;
        let n = d.len();
        let by_strength = |a: &usize, b: &usize| {
            d[*a].total_cmp(&d[*b]).then(self.angles_deg[*a].abs().total_cmp(&self.angles_deg[*b].abs()))
        };
        let flat = self.is_flat();
        let mut maxima: Vec<usize> = if flat {
            Vec::new()
        } else {
            (1..n.saturating_sub(1)).filter(|&i| d[i] < d[i - 1] && d[i] <= d[i + 1]).collect()
        };
        maxima.sort_by(by_strength);
        maxima.truncate(order);
        let mut angles: Vec<f64> = maxima.iter().map(|&i| self.refine(i)).collect();
        if angles.len() < order {
            let mut rest: Vec<usize> = (0..n).collect();
            if flat {
                rest.sort_by(|a, b| self.angles_deg[*a].abs().total_cmp(&self.angles_deg[*b].abs()));
            } else {
                rest.sort_by(by_strength);
            }
            for i in rest {
                if angles.len() == order {
                    break;
                }
                let a = self.angles_deg[i];
                if angles.iter().all(|b| (a - b).abs() >= FILL_SEPARATION_DEG) {
                    angles.push(a);
                }
            }
        }
        Candidates {
            angles_deg: angles,
            delays_samples: None,
            low_confidence: flat,
        }
    }

    fn refine(&self, i: usize) -> f64 {
        let d = &self.denominators;
        let curvature = d[i - 1] - 2.0 * d[i] + d[i + 1];
        if !(curvature > 0.0) {
            return self.angles_deg[i];
        }
        let delta = (0.5 * (d[i - 1] - d[i + 1]) / curvature).clamp(-0.5, 0.5);
        self.angles_deg[i] + delta * self.step_deg
    }
}

fn scan_angles(step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0 && step_deg <= 10.0) {
        return Err(Error::Config(format!("grid step {step_deg}° outside (0, 10]")));
    }
    let count = (180.0 / step_deg).ceil() as usize;
    Ok((1..count)
        .map(|i| -90.0 + i as f64 * step_deg)
        .filter(|a| a.abs() < 90.0 - 1e-9)
        .collect())
}

fn quadratic_form(m: &CMatrix, a: &nalgebra::DVector<Complex64>) -> f64 {
    (a.adjoint() * m * a)[(0, 0)].re
}

fn spectrum_from(
    q: &CMatrix,
    geometry: &UlaGeometry,
    step_deg: f64,
) -> Result<Spectrum> {
    let angles_deg = scan_angles(step_deg)?;
    let denominators = angles_deg
        .iter()
        .map(|&t| quadratic_form(q, &steering(t, geometry)).max(0.0))
        .collect();
    Ok(Spectrum {
        angles_deg,
        denominators,
        step_deg,
    })
}

/// D(θ) = a(θ)ᴴ·E_n·E_nᴴ·a(θ).
pub fn music_spectrum(
    cov: &SpatialCovariance,
    order: usize,
    geometry: &UlaGeometry,
    step_deg: f64,
) -> Result<Spectrum> {
    check_geometry(cov, geometry)?;
    let eig = cov.eigen()?;
    let projector = cov.noise_projector(&eig, order)?;
    spectrum_from(&projector, geometry, step_deg)
}

pub fn music(cov: &SpatialCovariance, order: usize, geometry: &UlaGeometry, step_deg: f64) -> Result<Candidates> {
    Ok(music_spectrum(cov, order, geometry, step_deg)?.peaks(order))
}

/// R + 1e-3·tr(R)/M·I.
pub(crate) fn loaded_inverse(cov: &SpatialCovariance) -> Result<CMatrix> {
    let m = cov.dim();
    let load = 1e-3 * cov.trace() / m as f64;
    let loaded = cov.matrix() + CMatrix::identity(m, m) * Complex64::new(load, 0.0);
    Cholesky::new(loaded)
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Numeric("covariance singular after diagonal loading".into()))
}

/// D(θ) = a(θ)ᴴ·R_l⁻¹·a(θ) with the loaded covariance R_l.
pub fn mvdr_spectrum(cov: &SpatialCovariance, geometry: &UlaGeometry, step_deg: f64) -> Result<Spectrum> {
    check_geometry(cov, geometry)?;
    cov.eigen()?;
    let inv = loaded_inverse(cov)?;
    spectrum_from(&inv, geometry, step_deg)
}

pub fn mvdr(cov: &SpatialCovariance, order: usize, geometry: &UlaGeometry, step_deg: f64) -> Result<Candidates> {
    if order == 0 || order >= cov.dim() {
        return Err(Error::SubspaceEmpty {
            order,
            elements: cov.dim(),
        });
    }
    Ok(mvdr_spectrum(cov, geometry, step_deg)?.peaks(order))
}

pub(crate) fn check_geometry(cov: &SpatialCovariance, geometry: &UlaGeometry) -> Result<()> {
    geometry.validate()?;
    if geometry.num_elements != cov.dim() {
        return Err(Error::Usage(format!(
            "covariance is {0}×{0} but the array has {1} elements",
            cov.dim(),
            geometry.num_elements
        )));
    }
    Ok(())
}
