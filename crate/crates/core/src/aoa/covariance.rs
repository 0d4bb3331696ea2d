use nalgebra::DMatrix;
use num_complex::Complex64;

use super::steering;
use crate::simchannel::UlaGeometry;
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Hermitian PSD spatial covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCovariance {
    matrix: CMatrix,
    /// Zero for closed-form matrices.
    num_snapshots: usize,
}

/// Eigenpairs in descending eigenvalue order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl SpatialCovariance {
    pub fn new(matrix: CMatrix, num_snapshots: usize) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(Error::Usage("covariance must be square and at least 2×2".into()));
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..matrix.nrows() {
            for j in 0..=i {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > 1e-12 * scale {
                    return Err(Error::Numeric("covariance is not Hermitian".into()));
                }
            }
        }
        Ok(Self { matrix, num_snapshots })
    }

    /// Σ pᵢ·a(θᵢ)a(θᵢ)ᴴ + σ²·I for uncorrelated sources.
    pub fn closed_form(sources: &[(f64, f64)], noise_power: f64, geometry: &UlaGeometry) -> Result<Self> {
        geometry.validate()?;
        let m = geometry.num_elements;
        let mut r = CMatrix::identity(m, m) * Complex64::new(noise_power, 0.0);
        for &(angle, power) in sources {
            crate::simchannel::steering_vector(angle, geometry)?;
            let a = steering(angle, geometry);
            r += &a * a.adjoint() * Complex64::new(power, 0.0);
        }
        Self::new(r, 0)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn num_snapshots(&self) -> usize {
        self.num_snapshots
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: &self.matrix * Complex64::new(c, 0.0),
            num_snapshots: self.num_snapshots,
        }
    }

    /// Fails on eigenvalues below −1e-9·trace.
    pub fn eigen(&self) -> Result<Eigen> {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite eigenvalue".into()));
        }
        let trace = self.trace();
        if *values.last().unwrap() < -1e-9 * trace.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Numeric(format!(
                "covariance not positive semi-definite (λ_min = {:.3e})",
                values.last().unwrap()
            )));
        }
        let vectors = CMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
        Ok(Eigen { values, vectors })
    }

    /// True when every eigenvalue equals the largest within 1e-9 relative.
    pub fn is_isotropic(&self, eig: &Eigen) -> bool {
        let top = eig.values[0];
        top <= 0.0 || eig.values.iter().all(|v| top - v <= 1e-9 * top)
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order == 0 {
            return Err(Error::Usage("model order must be at least 1".into()));
        }
        if order >= self.dim() {
            return Err(Error::SubspaceEmpty {
                order,
                elements: self.dim(),
            });
        }
        Ok(())
    }

    /// Eigenvectors of the `order` largest eigenvalues.
    pub fn signal_subspace(&self, eig: &Eigen, order: usize) -> Result<CMatrix> {
        self.check_order(order)?;
        Ok(eig.vectors.columns(0, order).into_owned())
    }

    /// Projector onto the noise subspace, E_n·E_nᴴ. For an isotropic matrix
    /// the split is undefined and the projector is averaged over all splits,
    /// (M − order)/M · I.
    pub fn noise_projector(&self, eig: &Eigen, order: usize) -> Result<CMatrix> {
        self.check_order(order)?;
        let m = self.dim();
        if self.is_isotropic(eig) {
            return Ok(CMatrix::identity(m, m) * Complex64::new((m - order) as f64 / m as f64, 0.0));
        }
        let en = eig.vectors.columns(order, m - order);
        Ok(en * en.adjoint())
    }
}

/// R = X·Xᴴ / K for an M×K snapshot matrix.
pub fn sample_covariance(snapshots: &CMatrix) -> Result<SpatialCovariance> {
    let k = snapshots.ncols();
    if k < 3 {
        return Err(Error::InsufficientData(format!("{k} snapshots, need at least 3")));
    }
    let r = snapshots * snapshots.adjoint() / Complex64::new(k as f64, 0.0);
    let r = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
    SpatialCovariance::new(r, k)
}

/// Eigenvalues below this fraction of the largest are clamped to it before
/// order selection.
pub const AIC_EIGEN_FLOOR: f64 = 1e-12;

/// Wax-Kailath AIC over k = 0..M−1:
/// AIC(k) = −2K(M−k)·ln(GM/AM) + 2k(2M−k) on the M−k smallest eigenvalues.
/// Returns the raw minimiser, which may be 0.
pub fn aic_model_order(cov: &SpatialCovariance) -> Result<usize> {
    let k_snap = cov.num_snapshots();
    if k_snap == 0 {
        return Err(Error::InsufficientData("AIC needs the snapshot count".into()));
    }
    let eig = cov.eigen()?;
    let m = cov.dim();
    // Eigenvalues below the working precision carry no information.
    let floor = AIC_EIGEN_FLOOR * eig.values[0].max(0.0);
    let mut best = (0, f64::INFINITY);
    for k in 0..m {
        let tail: Vec<f64> = eig.values[k..].iter().map(|v| v.max(floor)).collect();
        let n = tail.len() as f64;
        let am = tail.iter().sum::<f64>() / n;
        let log_ratio = if am <= 0.0 {
            0.0
        } else if tail.iter().any(|&v| v <= 0.0) {
            f64::NEG_INFINITY
        } else {
            tail.iter().map(|v| v.ln()).sum::<f64>() / n - am.ln()
        };
        let aic = -2.0 * k_snap as f64 * n * log_ratio + 2.0 * (k * (2 * m - k)) as f64;
        if aic < best.1 {
            best = (k, aic);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aoa::testutil::sources_snapshots;
    use crate::util::{complex_gaussian, rng_from_seed};

    #[test]
    fn aic_ignores_rounding_level_eigenvalues() {
        let g = UlaGeometry::default();
        let a = steering(20.0, &g);
        let mut r = &a * a.adjoint();
        r[(1, 1)] += Complex64::new(3e-16, 0.0);
        r[(2, 2)] -= Complex64::new(2e-16, 0.0);
        let cov = SpatialCovariance::new(r, 5000).unwrap();
        assert_eq!(aic_model_order(&cov).unwrap(), 1);
    }

    #[test]
    fn identical_columns_rank_one() {
        let g = UlaGeometry::default();
        let a = steering(0.0, &g);
        let x = CMatrix::from_fn(3, 10, |r, _| a[r]);
        let cov = sample_covariance(&x).unwrap();
        let eig = cov.eigen().unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-12);
        assert!(eig.values[1].abs() < 1e-12 && eig.values[2].abs() < 1e-12);
        assert!((cov.matrix() - &a * a.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn white_noise_is_scaled_identity() {
        let mut rng = rng_from_seed(1);
        let x = CMatrix::from_fn(3, 100_000, |_, _| complex_gaussian(&mut rng, 2.0));
        let cov = sample_covariance(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(cov.matrix()[(i, j)].norm() < 0.02 * 2.0);
                }
            }
        }
    }

    #[test]
    fn homogeneity() {
        let mut rng = rng_from_seed(2);
        let x = CMatrix::from_fn(3, 50, |_, _| complex_gaussian(&mut rng, 1.0));
        let c = Complex64::new(1.5, -2.0);
        let r1 = sample_covariance(&x).unwrap();
        let r2 = sample_covariance(&(&x * c)).unwrap();
        assert!((r2.matrix() - r1.matrix() * Complex64::new(c.norm_sqr(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn too_few_snapshots() {
        let x = CMatrix::zeros(3, 2);
        assert!(matches!(sample_covariance(&x), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn aic_equal_eigenvalues_is_zero() {
        let cov = SpatialCovariance::new(CMatrix::identity(3, 3), 1000).unwrap();
        assert_eq!(aic_model_order(&cov).unwrap(), 0);
    }

    #[test]
    fn aic_rejects_non_psd() {
        let mut m = CMatrix::identity(3, 3);
        m[(2, 2)] = Complex64::new(-1.0, 0.0);
        let cov = SpatialCovariance::new(m, 100).unwrap();
        assert!(matches!(aic_model_order(&cov), Err(Error::Numeric(_))));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(SpatialCovariance::new(m, 1), Err(Error::Numeric(_))));
    }

    /// With one source the decision between orders 1 and 2 compares the
    /// sphericity statistic of the two noise eigenvalues, asymptotically
    /// χ² with 3 degrees of freedom, against the penalty difference 16 − 10.
    /// AIC therefore picks order 1 with probability P(χ²₃ < 6) ≈ 0.888
    /// regardless of SNR or K.
    #[test]
    fn aic_one_source_rate_matches_chi_square() {
        let g = UlaGeometry::default();
        let mut rng = rng_from_seed(3);
        let trials = 400;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            let x = sources_snapshots(&[10.0], 20.0, 1000, &mut rng, &g);
            counts[aic_model_order(&sample_covariance(&x).unwrap()).unwrap()] += 1;
        }
        let rate = counts[1] as f64 / trials as f64;
        // P(χ²₃ < 6) = erf(√3) − √(12/π)·e^{−3}
        let chi3 = erf_sqrt3() - (12.0 / std::f64::consts::PI).sqrt() * (-3.0f64).exp();
        assert!((rate - chi3).abs() < 0.05, "rate {rate}, predicted {chi3}, counts {counts:?}");
        assert_eq!(counts[0], 0);
    }

    fn erf_sqrt3() -> f64 {
        // erf(√3) to 1e-12 via its Maclaurin series
        let x = 3f64.sqrt();
        let mut term = x;
        let mut sum = x;
        for n in 1..80 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn aic_two_sources() {
        let g = UlaGeometry::default();
        let mut rng = rng_from_seed(4);
        let hits = (0..100)
            .filter(|_| {
                let x = sources_snapshots(&[-20.0, 20.0], 20.0, 1000, &mut rng, &g);
                aic_model_order(&sample_covariance(&x).unwrap()).unwrap() == 2
            })
            .count();
        assert!(hits >= 95, "{hits}");
    }

    #[test]
    fn subspace_bounds() {
        let cov = SpatialCovariance::closed_form(&[(10.0, 1.0)], 0.01, &UlaGeometry::default()).unwrap();
        let eig = cov.eigen().unwrap();
        assert!(matches!(cov.noise_projector(&eig, 3), Err(Error::SubspaceEmpty { .. })));
        assert!(matches!(cov.noise_projector(&eig, 0), Err(Error::Usage(_))));
        let p = cov.noise_projector(&eig, 1).unwrap();
        assert!((&p * &p - &p).norm() < 1e-12);
    }
}
