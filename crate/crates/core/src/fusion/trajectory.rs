use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// 4 km/h.
pub const WALKING_SPEED_MPS: f64 = 4.0 / 3.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub label: String,
    pub x_m: f64,
    pub y_m: f64,
    pub arrival_s: f64,
    pub dwell_s: f64,
}

/// Stationary landmarks joined by straight constant-speed legs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTruth {
    landmarks: Vec<Landmark>,
}

impl TrajectoryTruth {
    /// Landmarks must arrive in strictly increasing order, each after the
    /// previous one's departure, with non-negative dwell.
    pub fn new(landmarks: Vec<Landmark>) -> Result<Self> {
        if landmarks.is_empty() {
            return Err(Error::Config("trajectory needs at least one landmark".into()));
        }
        for (i, l) in landmarks.iter().enumerate() {
            if !(l.dwell_s >= 0.0) || !l.arrival_s.is_finite() || !l.x_m.is_finite() || !l.y_m.is_finite() {
                return Err(Error::Config(format!("landmark `{}` has invalid fields", l.label)));
            }
            if i > 0 {
                let prev = &landmarks[i - 1];
                if !(l.arrival_s > prev.arrival_s) || l.arrival_s < prev.arrival_s + prev.dwell_s {
                    return Err(Error::Config(format!(
                        "landmark `{}` arrives before `{}` departs",
                        l.label, prev.label
                    )));
                }
            }
        }
        Ok(Self { landmarks })
    }

    /// Walks `points` in order at `speed_mps`, dwelling `dwell_s` at each,
    /// starting at `start_s`.
    pub fn from_path(points: &[(&str, f64, f64)], speed_mps: f64, dwell_s: f64, start_s: f64) -> Result<Self> {
        if !(speed_mps > 0.0) {
            return Err(Error::Config("walking speed must be positive".into()));
        }
        let mut t = start_s;
        let mut out: Vec<Landmark> = Vec::with_capacity(points.len());
        for (i, &(label, x, y)) in points.iter().enumerate() {
            if i > 0 {
                let (px, py) = (points[i - 1].1, points[i - 1].2);
                t += dwell_s + (x - px).hypot(y - py) / speed_mps;
            }
            out.push(Landmark {
                label: label.to_string(),
                x_m: x,
                y_m: y,
                arrival_s: t,
                dwell_s,
            });
        }
        Self::new(out)
    }

    /// Pedestrian loop A1 → A2 → T3 → T2 → T1 → A1 at 4 km/h with 30 s
    /// dwells. Only A1 (15 m on broadside) and T2 (90 m, the farthest
    /// point) are pinned by the published description; the other landmark
    /// coordinates are a reconstruction.
    pub fn reconstructed_field_trial() -> Self {
        Self::from_path(
            &[
                ("A1", 0.0, 15.0),
                ("A2", -20.0, 30.0),
                ("T3", -25.0, 60.0),
                ("T2", 0.0, 90.0),
                ("T1", 25.0, 50.0),
                ("A1", 0.0, 15.0),
            ],
            WALKING_SPEED_MPS,
            30.0,
            0.0,
        )
        .expect("static trajectory is valid")
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn start_s(&self) -> f64 {
        self.landmarks[0].arrival_s
    }

    pub fn end_s(&self) -> f64 {
        let last = self.landmarks.last().unwrap();
        last.arrival_s + last.dwell_s
    }

    /// Position at `t`: fixed during dwells, linear along legs.
    pub fn position(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= self.start_s() && t <= self.end_s()) {
            return Err(Error::Range(format!(
                "t = {t} s outside trajectory span [{}, {}]",
                self.start_s(),
                self.end_s()
            )));
        }
        let i = self.landmarks.partition_point(|l| l.arrival_s <= t) - 1;
        let here = &self.landmarks[i];
        let depart = here.arrival_s + here.dwell_s;
        if t <= depart || i + 1 == self.landmarks.len() {
            return Ok((here.x_m, here.y_m));
        }
        let next = &self.landmarks[i + 1];
        let u = (t - depart) / (next.arrival_s - depart);
        Ok((here.x_m + u * (next.x_m - here.x_m), here.y_m + u * (next.y_m - here.y_m)))
    }

    pub fn distance(&self, t: f64) -> Result<f64> {
        let (x, y) = self.position(t)?;
        Ok(x.hypot(y))
    }
}

pub fn interpolate_truth(truth: &TrajectoryTruth, timestamp_s: f64) -> Result<(f64, f64)> {
    truth.position(timestamp_s)
}
