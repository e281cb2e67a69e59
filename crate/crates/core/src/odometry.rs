//! Odometry samples, the session's local world frame and travelled arc length.

use alloc::collections::VecDeque;
use core::fmt;

use crate::geometry::Pose2D;
use crate::math;

/// Maximum |Δt| between a LiDAR timestamp and the odometry sample used for it.
pub const POSE_WINDOW: f64 = 0.100;

// samples older than this (relative to the newest) are dropped
const RETENTION: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometrySample {
    pub timestamp: f64,
    /// Pose in the odometry frame.
    pub pose: Pose2D,
    /// Meters per second.
    pub speed: f64,
}

/// Vehicle state resolved for one LiDAR cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub timestamp: f64,
    /// Pose in the local world frame.
    pub pose: Pose2D,
    pub speed: f64,
    /// Integrated path length since session start, meters.
    pub arc_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdometryError {
    OutOfOrder { previous: f64, got: f64 },
    NoPoseNear(f64),
    InvalidSample,
}

impl fmt::Display for OdometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OdometryError::OutOfOrder { previous, got } => {
                write!(f, "odometry timestamp {got} precedes {previous}")
            }
            OdometryError::NoPoseNear(t) => write!(f, "no odometry sample within 100 ms of t={t}"),
            OdometryError::InvalidSample => write!(f, "odometry sample has non-finite fields or negative speed"),
        }
    }
}

impl core::error::Error for OdometryError {}

/// Keeps recent samples re-expressed in the local world frame, whose origin
/// is the first pose of the session.
#[derive(Debug, Clone, Default)]
pub struct OdometryTrack {
    origin: Option<Pose2D>,
    samples: VecDeque<VehicleState>,
    arc_length: f64,
}

impl OdometryTrack {
    pub fn new() -> Self {
        Self::default()
    }

    /// First odometry-frame pose of the session, if any sample was pushed.
    pub fn origin(&self) -> Option<Pose2D> {
        self.origin
    }

    pub fn arc_length(&self) -> f64 {
        self.arc_length
    }

    pub fn latest(&self) -> Option<&VehicleState> {
        self.samples.back()
    }

    pub fn push(&mut self, s: OdometrySample) -> Result<(), OdometryError> {
        let finite = s.timestamp.is_finite() && s.pose.x.is_finite() && s.pose.y.is_finite() && s.pose.heading.is_finite();
        if !finite || !(s.speed >= 0.0) {
            return Err(OdometryError::InvalidSample);
        }
        if let Some(last) = self.samples.back() {
            if s.timestamp < last.timestamp {
                return Err(OdometryError::OutOfOrder {
                    previous: last.timestamp,
                    got: s.timestamp,
                });
            }
        }
        let origin = *self.origin.get_or_insert(s.pose);
        let local = origin.inverse().compose(&s.pose);
        if let Some(last) = self.samples.back() {
            self.arc_length += math::hypot(local.x - last.pose.x, local.y - last.pose.y);
        }
        self.samples.push_back(VehicleState {
            timestamp: s.timestamp,
            pose: local,
            speed: s.speed,
            arc_length: self.arc_length,
        });
        while let Some(front) = self.samples.front() {
            if s.timestamp - front.timestamp > RETENTION {
                self.samples.pop_front();
            } else {
                break;
            }
        }
        Ok(())
    }

    /// The sample nearest to `t`, if within [`POSE_WINDOW`]. Equal distances
    /// resolve to the later sample.
    pub fn state_at(&self, t: f64) -> Result<VehicleState, OdometryError> {
        let mut best: Option<(VehicleState, f64)> = None;
        for s in &self.samples {
            let dt = math::abs(s.timestamp - t);
            if best.is_none_or(|(_, b)| dt <= b) {
                best = Some((*s, dt));
            }
        }
        match best {
            Some((s, dt)) if dt <= POSE_WINDOW + 1e-9 => Ok(s),
            _ => Err(OdometryError::NoPoseNear(t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_PI_2;

    fn sample(t: f64, x: f64, y: f64, h: f64) -> OdometrySample {
        OdometrySample {
            timestamp: t,
            pose: Pose2D::new(x, y, h),
            speed: 10.0,
        }
    }

    #[test]
    fn first_pose_defines_local_origin() {
        let mut o = OdometryTrack::new();
        o.push(sample(0.0, 100.0, 50.0, FRAC_PI_2)).unwrap();
        o.push(sample(0.1, 100.0, 51.0, FRAC_PI_2)).unwrap();
        let s = o.state_at(0.1).unwrap();
        assert_abs_diff_eq!(s.pose.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.pose.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.pose.heading, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.arc_length, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn arc_length_integrates_path_not_displacement() {
        let mut o = OdometryTrack::new();
        o.push(sample(0.0, 0.0, 0.0, 0.0)).unwrap();
        o.push(sample(0.1, 10.0, 0.0, 0.0)).unwrap();
        o.push(sample(0.2, 0.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(o.arc_length(), 20.0, epsilon = 1e-12);
    }

    #[test]
    fn nearest_sample_within_window() {
        let mut o = OdometryTrack::new();
        o.push(sample(1.0, 0.0, 0.0, 0.0)).unwrap();
        o.push(sample(1.2, 2.0, 0.0, 0.0)).unwrap();
        assert_eq!(o.state_at(1.08).unwrap().timestamp, 1.0);
        assert_eq!(o.state_at(1.15).unwrap().timestamp, 1.2);
        assert_eq!(o.state_at(1.5), Err(OdometryError::NoPoseNear(1.5)));
    }

    #[test]
    fn rejects_out_of_order_and_invalid() {
        let mut o = OdometryTrack::new();
        o.push(sample(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(matches!(o.push(sample(0.5, 0.0, 0.0, 0.0)), Err(OdometryError::OutOfOrder { .. })));
        let mut bad = sample(2.0, 0.0, 0.0, 0.0);
        bad.speed = -1.0;
        assert_eq!(o.push(bad), Err(OdometryError::InvalidSample));
    }
}
