use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

const MAX_ITERATIONS: usize = 2000;

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    // value and derivative, coefficients in ascending order
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of Σ cᵢ·zⁱ (ascending coefficients) by Aberth-Ehrlich iteration
/// with a final Newton polish. Leading coefficients below 1e-14 of the
/// largest are dropped; trailing zero coefficients give roots at 0.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Numeric("polynomial has no finite non-zero coefficient".into()));
    }
    let tiny = 1e-14 * scale;
    let top = coeffs.iter().rposition(|c| c.norm() > tiny).unwrap();
    let low = coeffs.iter().position(|c| c.norm() > tiny).unwrap();
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let monic: Vec<Complex64> = coeffs[low..=top].iter().map(|c| c / coeffs[top]).collect();
    let n = monic.len() - 1;
    if n == 0 {
        return Ok(roots);
    }

    let radius = monic[0].norm().powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..MAX_ITERATIONS {
        let mut largest_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] -= step;
            largest_step = largest_step.max(step.norm() / z[i].norm().max(1.0));
        }
        if largest_step < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&monic, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *zi - p / dp;
            if horner(&monic, next).0.norm() < p.norm() {
                *zi = next;
            } else {
                break;
            }
        }
    }
    if z.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::Numeric("root finder diverged".into()));
    }
    roots.extend(z);
    Ok(roots)
}
