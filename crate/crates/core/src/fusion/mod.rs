//! Angle + range fusion into 2D fixes, ground-truth trajectory and error
//! statistics. Station at the origin, y along array broadside, x toward
//! positive angles.

mod cdf;
mod ranging;
mod trajectory;

pub use cdf::{position_error_cdf, ErrorCdf};
pub use ranging::{simulate_uwb_ranges, time_align, Alignment, DropoutModel, RangeMeasurement, UwbModel};
pub use trajectory::{interpolate_truth, Landmark, TrajectoryTruth, WALKING_SPEED_MPS};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PositionFix {
    pub timestamp_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub angle_deg: f64,
    pub range_m: f64,
    /// Timestamp of the range measurement paired with the angle.
    pub range_timestamp_s: f64,
}

/// x = r·sin θ, y = r·cos θ.
pub fn polar_to_position(angle_deg: f64, range_m: f64) -> Result<(f64, f64)> {
    if !(range_m > 0.0) || !range_m.is_finite() {
        return Err(Error::Usage(format!("range {range_m} m must be positive")));
    }
    if !(angle_deg.abs() < 90.0) {
        return Err(Error::Usage(format!("angle {angle_deg}° outside (-90°, 90°)")));
    }
    let (s, c) = angle_deg.to_radians().sin_cos();
    Ok((range_m * s, range_m * c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(polar_to_position(0.0, 15.0).unwrap(), (0.0, 15.0));
        let (x, y) = polar_to_position(30.0, 10.0).unwrap();
        assert!((x - 5.0).abs() < 1e-9 && (y - 8.660254037844386).abs() < 1e-9);
        let (x, y) = polar_to_position(-30.0, 10.0).unwrap();
        assert!((x + 5.0).abs() < 1e-9 && (y - 8.660254037844386).abs() < 1e-9);
        assert!(polar_to_position(90.0, 1.0).is_err());
        assert!(polar_to_position(10.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn inverse_of_cartesian_to_polar(x in -100.0f64..100.0, y in 0.01f64..100.0) {
            let r = x.hypot(y);
            let theta = x.atan2(y).to_degrees();
            let (px, py) = polar_to_position(theta, r).unwrap();
            prop_assert!((px - x).abs() < 1e-9 && (py - y).abs() < 1e-9);
        }
    }
}
