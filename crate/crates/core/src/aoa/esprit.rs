use nalgebra::Schur;
use num_complex::Complex64;

use super::spectrum::check_geometry;
use super::{angle_from_phase, CMatrix, Candidates, PilotObservations, SpatialCovariance};
use crate::simchannel::UlaGeometry;
use crate::{Error, Result};

/// Frequency subarray length used for smoothing in 2D ESPRIT.
const FREQ_SUBARRAY: usize = 8;
/// Weight of the frequency invariance in the joint diagonalisation.
const PAIRING_WEIGHT: f64 = 0.737;

/// Least-squares Ψ with E1·Ψ ≈ E2.
fn ls_invariance(e1: &CMatrix, e2: &CMatrix) -> Result<CMatrix> {
    let gram = e1.adjoint() * e1;
    gram.lu()
        .solve(&(e1.adjoint() * e2))
        .ok_or_else(|| Error::Estimation("rank-deficient invariance equation".into()))
}

fn schur(m: CMatrix) -> Result<(CMatrix, CMatrix)> {
    Schur::try_new(m, f64::EPSILON, 10_000)
        .map(|s| s.unpack())
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))
}

/// Eigenvalues of the LS rotation operator between subarrays {0..M−2} and
/// {1..M−1}.
pub fn esprit_rotation_eigenvalues(
    cov: &SpatialCovariance,
    order: usize,
    geometry: &UlaGeometry,
) -> Result<Vec<Complex64>> {
    check_geometry(cov, geometry)?;
    let eig = cov.eigen()?;
    let es = cov.signal_subspace(&eig, order)?;
    let m = cov.dim();
    let psi = ls_invariance(&es.rows(0, m - 1).into_owned(), &es.rows(1, m - 1).into_owned())?;
    let (_, t) = schur(psi)?;
    Ok(t.diagonal().iter().copied().collect())
}

fn angles_from(eigenvalues: &[Complex64], spacing: f64) -> Result<Vec<(usize, f64)>> {
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        (1.0 - eigenvalues[a].norm())
            .abs()
            .total_cmp(&(1.0 - eigenvalues[b].norm()).abs())
    });
    let mut out = Vec::new();
    let mut last_err = None;
    for i in order {
        match angle_from_phase(eigenvalues[i].arg(), spacing) {
            Ok(a) => out.push((i, a)),
            Err(e) => last_err = Some(e),
        }
    }
    if out.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::InvalidRoot("no eigenvalues".into())));
    }
    Ok(out)
}

/// LS-ESPRIT on the covariance signal subspace.
pub fn esprit(cov: &SpatialCovariance, order: usize, geometry: &UlaGeometry) -> Result<Candidates> {
    let values = esprit_rotation_eigenvalues(cov, order, geometry)?;
    let angles = angles_from(&values, geometry.element_spacing_wavelengths)?;
    let eig = cov.eigen()?;
    Ok(Candidates {
        angles_deg: angles.into_iter().map(|(_, a)| a).collect(),
        delays_samples: None,
        low_confidence: cov.is_isotropic(&eig),
    })
}

/// Joint angle-delay ESPRIT on the element × subcarrier data. Each symbol is
/// smoothed over frequency subarrays of 8 consecutive pilots; element shift
/// gives the angle, pilot shift the delay, and both are paired through a
/// common Schur basis of Ψ_e + γ·Ψ_f.
pub fn esprit_2d(pilots: &PilotObservations, order: usize, geometry: &UlaGeometry) -> Result<Candidates> {
    geometry.validate()?;
    let m = pilots.num_elements();
    let np = pilots.num_pilots();
    if m != geometry.num_elements || pilots.num_symbols() == 0 {
        return Err(Error::Usage(format!(
            "pilot observations have {m} elements, array has {}",
            geometry.num_elements
        )));
    }
    if np < 2 {
        return Err(Error::Estimation("2D ESPRIT needs at least two pilots".into()));
    }
    let p = FREQ_SUBARRAY.min(np);
    let dim = m * p;
    if order == 0 || order >= m || order >= dim {
        return Err(Error::SubspaceEmpty { order, elements: m });
    }
    let windows = np - p + 1;
    let mut r = CMatrix::zeros(dim, dim);
    let mut x = nalgebra::DVector::<Complex64>::zeros(dim);
    for symbol in &pilots.values {
        for q in 0..windows {
            for f in 0..p {
                for e in 0..m {
                    x[f * m + e] = symbol[q + f][e];
                }
            }
            r.ger(Complex64::new(1.0, 0.0), &x, &x.conjugate(), Complex64::new(1.0, 0.0));
        }
    }
    let count = pilots.num_symbols() * windows;
    r /= Complex64::new(count as f64, 0.0);
    let r = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let cov = SpatialCovariance::new(r, count)?;
    let eig = cov.eigen()?;
    if eig.values[order - 1] <= 1e-12 * eig.values[0].max(f64::MIN_POSITIVE) {
        return Err(Error::Estimation(format!("data rank below model order {order}")));
    }
    let es = cov.signal_subspace(&eig, order)?;

    let rows = |pred: &dyn Fn(usize, usize) -> bool| -> Vec<usize> {
        (0..dim).filter(|&i| pred(i / m, i % m)).collect()
    };
    let select = |idx: &[usize]| CMatrix::from_fn(idx.len(), order, |r, c| es[(idx[r], c)]);
    let e1 = rows(&|_, e| e + 1 < m);
    let e2: Vec<usize> = e1.iter().map(|i| i + 1).collect();
    let f1 = rows(&|f, _| f + 1 < p);
    let f2: Vec<usize> = f1.iter().map(|i| i + m).collect();
    let psi_e = ls_invariance(&select(&e1), &select(&e2))?;
    let psi_f = ls_invariance(&select(&f1), &select(&f2))?;

    let (q, _) = schur(&psi_e + &psi_f * Complex64::new(PAIRING_WEIGHT, 0.0))?;
    let phi_e: Vec<Complex64> = (q.adjoint() * &psi_e * &q).diagonal().iter().copied().collect();
    let phi_f: Vec<Complex64> = (q.adjoint() * &psi_f * &q).diagonal().iter().copied().collect();

    let angles = angles_from(&phi_e, geometry.element_spacing_wavelengths)?;
    let scale = pilots.fft_size as f64 / (2.0 * std::f64::consts::PI * pilots.subcarrier_step as f64);
    Ok(Candidates {
        delays_samples: Some(angles.iter().map(|&(i, _)| -phi_f[i].arg() * scale).collect()),
        angles_deg: angles.into_iter().map(|(_, a)| a).collect(),
        low_confidence: cov.is_isotropic(&eig),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aoa::testutil::{c, sources_snapshots};
    use crate::aoa::{music, sample_covariance};
    use crate::util::{complex_gaussian, rng_from_seed};
    use crate::waveform::{config_from_catalog, ConfigId};

    fn g() -> UlaGeometry {
        UlaGeometry::default()
    }

    #[test]
    fn closed_form_10deg() {
        let cov = SpatialCovariance::closed_form(&[(10.0, 1.0)], 0.01, &g()).unwrap();
        let a = esprit(&cov, 1, &g()).unwrap().angles_deg[0];
        assert!((a - 10.0).abs() < 0.01, "{a}");
    }

    #[test]
    fn broadside_eigenvalue_is_one() {
        let cov = SpatialCovariance::closed_form(&[(0.0, 1.0)], 0.01, &g()).unwrap();
        let v = esprit_rotation_eigenvalues(&cov, 1, &g()).unwrap();
        assert!((v[0] - c(1.0, 0.0)).norm() < 1e-12, "{}", v[0]);
    }

    #[test]
    fn two_sources() {
        let mut rng = rng_from_seed(40);
        let mut ok = 0;
        for _ in 0..100 {
            let x = sources_snapshots(&[-20.0, 20.0], 20.0, 1000, &mut rng, &g());
            let mut a = esprit(&sample_covariance(&x).unwrap(), 2, &g()).unwrap().angles_deg;
            a.sort_by(f64::total_cmp);
            if (a[0] + 20.0).abs() < 0.5 && (a[1] - 20.0).abs() < 0.5 {
                ok += 1;
            }
        }
        assert!(ok >= 95, "{ok}");
    }

    #[test]
    fn order_limits() {
        let cov = SpatialCovariance::closed_form(&[(0.0, 1.0)], 0.01, &g()).unwrap();
        assert!(matches!(esprit(&cov, 3, &g()), Err(Error::SubspaceEmpty { .. })));
    }

    #[test]
    fn esprit_2d_single_ray() {
        let cfg = config_from_catalog(ConfigId::II);
        let obs = PilotObservations::from_rays(&[(10.0, 0.0, c(1.0, 0.0))], &g(), &cfg, 4).unwrap();
        let cands = esprit_2d(&obs, 1, &g()).unwrap();
        assert!((cands.angles_deg[0] - 10.0).abs() < 0.05);
        assert!(cands.delays_samples.unwrap()[0].abs() < 0.05);
    }

    #[test]
    fn esprit_2d_delay_is_separable() {
        let cfg = config_from_catalog(ConfigId::VI);
        for d in [0.0, 5.0, 20.0] {
            let obs = PilotObservations::from_rays(&[(-33.0, d, c(0.3, 0.8))], &g(), &cfg, 4).unwrap();
            let cands = esprit_2d(&obs, 1, &g()).unwrap();
            assert!((cands.angles_deg[0] + 33.0).abs() < 0.05);
            assert!((cands.delays_samples.unwrap()[0] - d).abs() < 0.05);
        }
    }

    #[test]
    fn esprit_2d_two_rays_20db() {
        let cfg = config_from_catalog(ConfigId::II);
        let mut rng = rng_from_seed(41);
        let mut ok = 0;
        for _ in 0..100 {
            let g0 = complex_gaussian(&mut rng, 1.0);
            let g1 = complex_gaussian(&mut rng, 1.0);
            let mut obs = PilotObservations::from_rays(&[(0.0, 0.0, g0), (30.0, 10.0, g1)], &g(), &cfg, 8).unwrap();
            let sigma2 = (g0.norm_sqr() + g1.norm_sqr()) / 100.0;
            for s in obs.values.iter_mut() {
                for p in s.iter_mut() {
                    for v in p.iter_mut() {
                        *v += complex_gaussian(&mut rng, sigma2);
                    }
                }
            }
            let mut a = esprit_2d(&obs, 2, &g()).unwrap().angles_deg;
            a.sort_by(f64::total_cmp);
            if a.len() == 2 && a[0].abs() < 1.0 && (a[1] - 30.0).abs() < 1.0 {
                ok += 1;
            }
        }
        assert!(ok >= 90, "{ok}");
    }

    #[test]
    fn esprit_agrees_with_music() {
        let mut rng = rng_from_seed(42);
        for _ in 0..50 {
            let theta = rand::Rng::random_range(&mut rng, -60.0..60.0);
            let x = sources_snapshots(&[theta], 20.0, 1000, &mut rng, &g());
            let cov = sample_covariance(&x).unwrap();
            let a = music(&cov, 1, &g(), 0.5).unwrap().angles_deg[0];
            let b = esprit(&cov, 1, &g()).unwrap().angles_deg[0];
            assert!((a - b).abs() < 0.3, "{theta}: {a} vs {b}");
        }
    }
}
