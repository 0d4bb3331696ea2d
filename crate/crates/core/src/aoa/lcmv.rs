use super::spectrum::{check_geometry, loaded_inverse};
use super::{steering, CMatrix, SpatialCovariance};
use crate::simchannel::UlaGeometry;
use crate::{Error, Result};

/// Candidates closer than this are merged before selection.
const MERGE_DEG: f64 = 0.5;

/// Output power wᴴR_lw of the LCMV beamformer with unit gain at
/// `constraints[target]` and nulls at the others, which equals
/// [(Cᴴ·R_l⁻¹·C)⁻¹]_{target,target}.
pub fn lcmv_output_power(
    constraints: &[f64],
    target: usize,
    cov: &SpatialCovariance,
    geometry: &UlaGeometry,
) -> Result<f64> {
    check_geometry(cov, geometry)?;
    let inv = loaded_inverse(cov)?;
    power_with(&inv, constraints, target, geometry)
}

fn power_with(inv: &CMatrix, constraints: &[f64], target: usize, geometry: &UlaGeometry) -> Result<f64> {
    let cols: Vec<_> = constraints.iter().map(|&a| steering(a, geometry)).collect();
    let c = CMatrix::from_columns(&cols);
    let gram = c.adjoint() * inv * &c;
    let g_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Numeric("LCMV constraint matrix is singular".into()))?;
    Ok(g_inv[(target, target)].re)
}

/// Candidate with the largest LCMV output power; ties go to the smaller
/// |angle|. Candidates within 0.5° of an earlier one are dropped first.
pub fn lcmv_select(candidates_deg: &[f64], cov: &SpatialCovariance, geometry: &UlaGeometry) -> Result<f64> {
    let mut merged: Vec<f64> = Vec::with_capacity(candidates_deg.len());
    for &a in candidates_deg {
        if merged.iter().all(|b| (a - b).abs() >= MERGE_DEG) {
            merged.push(a);
        }
    }
    match merged.len() {
        0 => Err(Error::Usage("no candidate angles".into())),
        1 => Ok(merged[0]),
        _ => {
            check_geometry(cov, geometry)?;
            let inv = loaded_inverse(cov)?;
            let powers = (0..merged.len())
                .map(|i| power_with(&inv, &merged, i, geometry))
                .collect::<Result<Vec<f64>>>()?;
            let top = powers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tie = 1e-12 * top.abs();
            Ok((0..merged.len())
                .filter(|&i| powers[i] >= top - tie)
                .map(|i| merged[i])
                .min_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aoa::testutil::sources_snapshots;
    use crate::aoa::sample_covariance;
    use crate::util::rng_from_seed;
    use nalgebra::DVector;
    use num_complex::Complex64;
    use rand::Rng;

    fn g() -> UlaGeometry {
        UlaGeometry::default()
    }

    /// Independent route: generalised sidelobe canceller. With B spanning
    /// the null space of the null constraints' columns plus the target, the
    /// optimal weights are w = w_q − B·(BᴴRB)⁻¹BᴴR·w_q.
    fn gsc_power(constraints: &[f64], target: usize, cov: &SpatialCovariance) -> f64 {
        let m = cov.dim();
        let load = 1e-3 * cov.trace() / m as f64;
        let r = cov.matrix() + CMatrix::identity(m, m) * Complex64::new(load, 0.0);
        let c = CMatrix::from_columns(&constraints.iter().map(|&a| steering(a, &g())).collect::<Vec<_>>());
        let mut f = DVector::zeros(constraints.len());
        f[target] = Complex64::new(1.0, 0.0);
        // quiescent weights: minimum-norm solution of Cᴴw = f
        let wq = &c * (c.adjoint() * &c).try_inverse().unwrap() * &f;
        // blocking matrix: eigenvectors of the projector onto span(C)^⊥
        let proj = CMatrix::identity(m, m) - &c * (c.adjoint() * &c).try_inverse().unwrap() * c.adjoint();
        let eig = proj.symmetric_eigen();
        let keep: Vec<_> = (0..m).filter(|&k| eig.eigenvalues[k] > 0.5).map(|k| eig.eigenvectors.column(k)).collect();
        let b = CMatrix::from_columns(&keep);
        let wa = (b.adjoint() * &r * &b).try_inverse().unwrap() * b.adjoint() * &r * &wq;
        let w = &wq - &b * wa;
        (w.adjoint() * &r * &w)[(0, 0)].re
    }

    #[test]
    fn single_candidate_unchanged() {
        let cov = SpatialCovariance::closed_form(&[(7.0, 1.0)], 0.1, &g()).unwrap();
        assert_eq!(lcmv_select(&[7.3], &cov, &g()).unwrap(), 7.3);
        assert!(lcmv_select(&[], &cov, &g()).is_err());
    }

    #[test]
    fn stronger_source_selected() {
        let cov = SpatialCovariance::closed_form(&[(-20.0, 1.0), (30.0, 0.25)], 0.01, &g()).unwrap();
        assert_eq!(lcmv_select(&[30.0, -20.0], &cov, &g()).unwrap(), -20.0);
        let p0 = gsc_power(&[-20.0, 30.0], 0, &cov);
        let p1 = gsc_power(&[-20.0, 30.0], 1, &cov);
        assert!(p0 > p1);
        assert!((lcmv_output_power(&[-20.0, 30.0], 0, &cov, &g()).unwrap() - p0).abs() < 1e-9 * p0);
        assert!((lcmv_output_power(&[-20.0, 30.0], 1, &cov, &g()).unwrap() - p1).abs() < 1e-9 * p0);
    }

    #[test]
    fn matches_direct_enumeration() {
        let mut rng = rng_from_seed(50);
        for _ in 0..100 {
            let a = rng.random_range(-60.0..-5.0);
            let b = rng.random_range(5.0..60.0);
            let x = sources_snapshots(&[a, b], 20.0, 200, &mut rng, &g());
            let cov = sample_covariance(&x).unwrap();
            let cands = [a + rng.random_range(-1.0..1.0), b + rng.random_range(-1.0..1.0)];
            let pa = gsc_power(&cands, 0, &cov);
            let pb = gsc_power(&cands, 1, &cov);
            let expect = if pa >= pb { cands[0] } else { cands[1] };
            assert_eq!(lcmv_select(&cands, &cov, &g()).unwrap(), expect);
        }
    }

    #[test]
    fn close_candidates_merged() {
        let cov = SpatialCovariance::closed_form(&[(10.0, 1.0)], 0.1, &g()).unwrap();
        assert_eq!(lcmv_select(&[10.0, 10.2], &cov, &g()).unwrap(), 10.0);
    }

    #[test]
    fn tie_goes_to_smaller_magnitude() {
        let cov = SpatialCovariance::new(CMatrix::identity(3, 3), 0).unwrap();
        assert_eq!(lcmv_select(&[25.0, -25.0], &cov, &g()).unwrap(), 25.0);
    }
}
