use super::{PositionFix, TrajectoryTruth};
use crate::{Error, Result};

/// Empirical distribution of position errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCdf {
    sorted: Vec<f64>,
}

impl ErrorCdf {
    pub fn from_errors(mut errors: Vec<f64>) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::Usage("error CDF needs at least one value".into()));
        }
        if errors.iter().any(|e| !e.is_finite()) {
            return Err(Error::Numeric("non-finite position error".into()));
        }
        errors.sort_by(f64::total_cmp);
        Ok(Self { sorted: errors })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Percentile `q` ∈ [0, 100], linear between order statistics at rank
    /// (n − 1)·q/100.
    pub fn percentile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 100.0);
        let h = (self.sorted.len() - 1) as f64 * q / 100.0;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        self.sorted[lo] + (h - lo as f64) * (self.sorted[hi] - self.sorted[lo])
    }

    /// Fraction of errors ≤ `e`.
    pub fn probability(&self, e: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= e) as f64 / self.sorted.len() as f64
    }

    /// (error, cumulative probability) steps for plotting.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        self.sorted.iter().enumerate().map(|(i, &e)| (e, (i + 1) as f64 / n)).collect()
    }
}

/// Euclidean error of each fix against the interpolated truth.
pub fn position_error_cdf(fixes: &[PositionFix], truth: &TrajectoryTruth) -> Result<ErrorCdf> {
    let errors = fixes
        .iter()
        .map(|f| {
            let (x, y) = truth.position(f.timestamp_s)?;
            Ok((f.x_m - x).hypot(f.y_m - y))
        })
        .collect::<Result<Vec<f64>>>()?;
    ErrorCdf::from_errors(errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::polar_to_position;
    use proptest::prelude::*;

    #[test]
    fn percentile_definition() {
        let c = ErrorCdf::from_errors((1..=10).map(f64::from).collect()).unwrap();
        assert_eq!(c.percentile(50.0), 5.5);
        assert_eq!(c.percentile(0.0), 1.0);
        assert_eq!(c.percentile(100.0), 10.0);
        assert!((c.percentile(90.0) - 9.1).abs() < 1e-12);
        assert_eq!(c.probability(5.0), 0.5);
        assert_eq!(c.points().last().unwrap(), &(10.0, 1.0));
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(ErrorCdf::from_errors(vec![]), Err(Error::Usage(_))));
        let truth = TrajectoryTruth::reconstructed_field_trial();
        assert!(position_error_cdf(&[], &truth).is_err());
    }

    #[test]
    fn fixes_on_truth_have_zero_error() {
        let truth = TrajectoryTruth::reconstructed_field_trial();
        let fixes: Vec<PositionFix> = (0..300)
            .map(|i| {
                let t = i as f64;
                let (x, y) = truth.position(t).unwrap();
                let angle = x.atan2(y).to_degrees();
                let r = x.hypot(y);
                let (px, py) = polar_to_position(angle, r).unwrap();
                PositionFix {
                    timestamp_s: t,
                    x_m: px,
                    y_m: py,
                    angle_deg: angle,
                    range_m: r,
                    range_timestamp_s: t,
                }
            })
            .collect();
        let c = position_error_cdf(&fixes, &truth).unwrap();
        assert!(c.percentile(90.0) < 1e-9);
    }

    proptest! {
        #[test]
        fn monotone(errors in proptest::collection::vec(0.0f64..100.0, 1..60), q1 in 0.0f64..100.0, q2 in 0.0f64..100.0) {
            let c = ErrorCdf::from_errors(errors).unwrap();
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            prop_assert!(c.percentile(lo) <= c.percentile(hi));
            let pts = c.points();
            for w in pts.windows(2) {
                prop_assert!(w[0].0 <= w[1].0 && w[0].1 < w[1].1);
            }
            // right-continuous: probability at each order statistic includes it
            for &(e, p) in &pts {
                prop_assert!(c.probability(e) >= p - 1e-12);
            }
        }
    }
}
