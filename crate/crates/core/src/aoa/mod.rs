//! Angle-of-arrival estimation on the ULA: covariance, model order, the five
//! subspace/beamforming estimators behind a common trait, LCMV candidate
//! selection and SINR.

mod covariance;
mod esprit;
mod lcmv;
mod observations;
mod registry;
mod root_music;
mod rooting;
mod sinr;
mod spectrum;
#[cfg(test)]
mod testutil;

pub use covariance::{aic_model_order, sample_covariance, AIC_EIGEN_FLOOR, CMatrix, Eigen, SpatialCovariance};
pub use esprit::{esprit, esprit_2d, esprit_rotation_eigenvalues};
pub use lcmv::{lcmv_output_power, lcmv_select};
pub use observations::PilotObservations;
pub use registry::{
    estimate_angle, registry, AoAEstimate, AoaEstimator, Candidates, EstimatorFactory, EstimatorInput,
    EstimatorRegistry, SelectedAngle, DEFAULT_GRID_STEP_DEG,
};
pub use root_music::{root_music, root_music_polynomial};
pub use rooting::poly_roots;
pub use sinr::{reported_sinr_db, sinr_estimate, SINR_FLOOR_DB};
pub use spectrum::{music, music_spectrum, mvdr, mvdr_spectrum, Spectrum};

use num_complex::Complex64;

use crate::simchannel::UlaGeometry;
use crate::{Error, Result};

pub(crate) fn steering(aoa_deg: f64, geometry: &UlaGeometry) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_vec(crate::simchannel::steering_unchecked(
        aoa_deg,
        geometry.num_elements,
        geometry.element_spacing_wavelengths,
    ))
}

/// Angle whose inter-element phase step is `phase`.
pub(crate) fn angle_from_phase(phase: f64, spacing: f64) -> Result<f64> {
    let s = phase / (2.0 * std::f64::consts::PI * spacing);
    if !(s.abs() < 1.0) {
        return Err(Error::InvalidRoot(format!(
            "phase step {phase:.4} rad maps outside the visible region"
        )));
    }
    Ok(s.asin().to_degrees())
}
