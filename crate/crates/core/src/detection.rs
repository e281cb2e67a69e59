//! Detector outputs: roadwork classes, class-specific confidence gating and
//! pairing of camera records with LiDAR cycles.

use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::geometry::PixelBox;
use crate::math;

/// Maximum |Δt| between a LiDAR cycle and the camera record it consumes.
pub const PAIRING_WINDOW: f64 = 0.100;

// absorbs decimal timestamp representation error at the window edge
const PAIRING_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ObjectClass {
    Barrier,
    TrafficCone,
    PanelPassLeft,
    PanelPassRight,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 4] = [
        ObjectClass::Barrier,
        ObjectClass::TrafficCone,
        ObjectClass::PanelPassLeft,
        ObjectClass::PanelPassRight,
    ];

    pub const fn is_barrier(self) -> bool {
        matches!(self, ObjectClass::Barrier)
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Barrier => "barrier",
            ObjectClass::TrafficCone => "traffic_cone",
            ObjectClass::PanelPassLeft => "panel_pass_left",
            ObjectClass::PanelPassRight => "panel_pass_right",
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One detector output box at detection resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub class: ObjectClass,
    pub confidence: f64,
    pub bbox: PixelBox,
}

/// All detections produced for one camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub timestamp: f64,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ConfidencePolicy {
    pub barrier_threshold: f64,
    /// Cones and vertical panels.
    pub other_threshold: f64,
}

impl Default for ConfidencePolicy {
    fn default() -> Self {
        Self {
            barrier_threshold: 0.75,
            other_threshold: 0.70,
        }
    }
}

impl ConfidencePolicy {
    pub fn validate(&self) -> Result<(), &'static str> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.barrier_threshold) {
            return Err("barrier_threshold");
        }
        if !open_unit(self.other_threshold) {
            return Err("other_threshold");
        }
        Ok(())
    }

    pub fn threshold_for(&self, class: ObjectClass) -> f64 {
        if class.is_barrier() {
            self.barrier_threshold
        } else {
            self.other_threshold
        }
    }

    /// Inclusive: a confidence equal to the threshold is kept.
    pub fn accepts(&self, d: &Detection) -> bool {
        d.confidence >= self.threshold_for(d.class)
    }
}

/// Keeps detections at or above their class threshold, in input order.
pub fn gate_detections(dets: &[Detection], policy: &ConfidencePolicy) -> Vec<Detection> {
    dets.iter().filter(|d| policy.accepts(d)).copied().collect()
}

/// Picks the camera record closest in time to a LiDAR cycle, if one lies
/// within [`PAIRING_WINDOW`]. Equal distances resolve to the later record.
pub fn pair_with_lidar(records: &[DetectionRecord], lidar_timestamp: f64) -> Option<&DetectionRecord> {
    pair_index(records, lidar_timestamp).map(|i| &records[i])
}

/// Position of the record [`pair_with_lidar`] would pick.
pub fn pair_index(records: &[DetectionRecord], lidar_timestamp: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in records.iter().enumerate() {
        let dt = math::abs(r.timestamp - lidar_timestamp);
        if dt > PAIRING_WINDOW + PAIRING_EPSILON {
            continue;
        }
        match best {
            Some((b, bdt)) if dt > bdt || (dt == bdt && r.timestamp < records[b].timestamp) => {}
            _ => best = Some((i, dt)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn det(class: ObjectClass, confidence: f64) -> Detection {
        Detection {
            class,
            confidence,
            bbox: PixelBox::new(0.0, 0.0, 10.0, 10.0).unwrap(),
        }
    }

    fn record(t: f64) -> DetectionRecord {
        DetectionRecord {
            timestamp: t,
            detections: vec![det(ObjectClass::Barrier, 0.9)],
        }
    }

    #[test]
    fn gating_uses_class_thresholds() {
        let p = ConfidencePolicy::default();
        let dets = [
            det(ObjectClass::Barrier, 0.76),
            det(ObjectClass::Barrier, 0.74),
            det(ObjectClass::PanelPassLeft, 0.70),
            det(ObjectClass::TrafficCone, 0.69),
        ];
        let kept = gate_detections(&dets, &p);
        assert_eq!(kept, vec![dets[0], dets[2]]);
        assert!(gate_detections(&[], &p).is_empty());
    }

    #[test]
    fn barrier_threshold_is_inclusive() {
        let p = ConfidencePolicy::default();
        assert!(p.accepts(&det(ObjectClass::Barrier, 0.75)));
    }

    #[test]
    fn policy_validation() {
        let bad = ConfidencePolicy {
            barrier_threshold: 1.0,
            ..ConfidencePolicy::default()
        };
        assert_eq!(bad.validate(), Err("barrier_threshold"));
        assert!(ConfidencePolicy::default().validate().is_ok());
    }

    #[test]
    fn pairing_examples() {
        let recs = [record(1.00)];
        assert_eq!(pair_with_lidar(&recs, 1.05).map(|r| r.timestamp), Some(1.00));
        assert!(pair_with_lidar(&recs, 1.30).is_none());

        let recs = [record(0.95), record(1.04)];
        assert_eq!(pair_with_lidar(&recs, 1.05).map(|r| r.timestamp), Some(1.04));
    }

    #[test]
    fn pairing_window_edge_is_inclusive() {
        let recs = [record(1.0)];
        assert!(pair_with_lidar(&recs, 1.1).is_some());
        assert!(pair_with_lidar(&recs, 1.1001).is_none());
    }

    #[test]
    fn pairing_tie_prefers_later_record() {
        let recs = [record(0.95), record(1.05)];
        assert_eq!(pair_with_lidar(&recs, 1.0).map(|r| r.timestamp), Some(1.05));
    }
}
