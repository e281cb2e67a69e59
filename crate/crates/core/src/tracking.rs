//! Detection counting per LiDAR object id and promotion to confirmed roadwork
//! objects under a speed-adaptive threshold.
//!
//! The threshold is `round(a · ln((d / v · fps) / b))` clamped to
//! `[min_threshold, max_threshold]`: fewer frames are available at higher
//! speed, so fewer sightings are required.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::detection::ObjectClass;
use crate::fusion::Match;
use crate::geometry::WorldPoint;
use crate::math;
use crate::ObjectId;

/// Seconds of absence after which an unpromoted id is forgotten.
pub const EVICTION_AFTER: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ThresholdParams {
    pub a: f64,
    pub b: f64,
    /// Scanner range, meters.
    pub d: f64,
    /// Expected processing rate, frames per second.
    pub fps: f64,
    pub min_threshold: u32,
    pub max_threshold: u32,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self {
            a: 5.0,
            b: 12.5,
            d: 50.0,
            fps: 10.0,
            min_threshold: 2,
            max_threshold: 5,
        }
    }
}

impl ThresholdParams {
    pub fn validate(&self) -> Result<(), &'static str> {
        for (name, v) in [("a", self.a), ("b", self.b), ("d", self.d), ("fps", self.fps)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(name);
            }
        }
        if self.min_threshold > self.max_threshold {
            return Err("min_threshold");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrackingError {
    /// Speed was negative or NaN.
    InvalidSpeed(f64),
}

impl fmt::Display for TrackingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrackingError::InvalidSpeed(v) => write!(f, "invalid vehicle speed {v} m/s"),
        }
    }
}

impl core::error::Error for TrackingError {}

/// Number of sightings required before an object is promoted at speed `v`
/// (meters per second).
pub fn detection_threshold(v: f64, p: &ThresholdParams) -> Result<u32, TrackingError> {
    if !(v >= 0.0) {
        return Err(TrackingError::InvalidSpeed(v));
    }
    let frames = p.d / v * p.fps;
    if !frames.is_finite() {
        return Ok(p.max_threshold);
    }
    let t = math::round(p.a * math::ln(frames / p.b));
    let lo = f64::from(p.min_threshold);
    let hi = f64::from(p.max_threshold);
    // clamp also maps ln(0) = -inf and NaN-free extremes into range
    Ok(t.clamp(lo, hi) as u32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackedObject {
    pub object_id: ObjectId,
    /// Latest matched class.
    pub class: ObjectClass,
    /// Latest world-frame contour.
    pub world_contour: Vec<WorldPoint>,
    pub detection_count: u32,
    pub ever_cnn_matched: bool,
    pub last_seen: f64,
    pub promoted: bool,
}

/// A contour object within tracking range for the current frame, already
/// transformed into the local world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedObject {
    pub object_id: ObjectId,
    pub world_contour: Vec<WorldPoint>,
}

/// Dictionary of currently detected roadwork objects.
#[derive(Debug, Clone, Default)]
pub struct ObjectTracker {
    params: ThresholdParams,
    objects: BTreeMap<ObjectId, TrackedObject>,
}

impl ObjectTracker {
    pub fn new(params: ThresholdParams) -> Self {
        Self {
            params,
            objects: BTreeMap::new(),
        }
    }

    pub fn params(&self) -> &ThresholdParams {
        &self.params
    }

    pub fn get(&self, id: ObjectId) -> Option<&TrackedObject> {
        self.objects.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TrackedObject> {
        self.objects.values()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn reset(&mut self) {
        self.objects.clear();
    }

    /// Applies one frame and returns the objects promoted in it, ordered by id.
    ///
    /// Matched ids gain one sighting. Ids that were CNN-matched before and are
    /// seen by the LiDAR without a match this frame gain one as well. Ids
    /// never matched are not tracked.
    pub fn update(
        &mut self,
        matches: &[Match],
        observed: &[ObservedObject],
        speed: f64,
        timestamp: f64,
    ) -> Result<Vec<TrackedObject>, TrackingError> {
        let threshold = detection_threshold(speed, &self.params)?;
        let contours: BTreeMap<ObjectId, &ObservedObject> = observed.iter().map(|o| (o.object_id, o)).collect();
        let mut touched: Vec<ObjectId> = Vec::new();

        for m in matches {
            let contour = contours.get(&m.object_id).map(|o| o.world_contour.clone()).unwrap_or_default();
            let obj = self.objects.entry(m.object_id).or_insert_with(|| TrackedObject {
                object_id: m.object_id,
                class: m.class,
                world_contour: Vec::new(),
                detection_count: 0,
                ever_cnn_matched: true,
                last_seen: timestamp,
                promoted: false,
            });
            obj.detection_count += 1;
            obj.class = m.class;
            obj.ever_cnn_matched = true;
            obj.last_seen = timestamp;
            if !contour.is_empty() {
                obj.world_contour = contour;
            }
            touched.push(m.object_id);
        }

        for o in observed {
            if touched.contains(&o.object_id) {
                continue;
            }
            if let Some(obj) = self.objects.get_mut(&o.object_id) {
                obj.last_seen = timestamp;
                obj.world_contour.clone_from(&o.world_contour);
                if obj.ever_cnn_matched {
                    obj.detection_count += 1;
                    touched.push(o.object_id);
                }
            }
        }

        touched.sort_unstable();
        touched.dedup();
        let mut promoted = Vec::new();
        for id in touched {
            let Some(obj) = self.objects.get_mut(&id) else { continue };
            if !obj.promoted && obj.ever_cnn_matched && obj.detection_count >= threshold && !obj.world_contour.is_empty() {
                obj.promoted = true;
                promoted.push(obj.clone());
            }
        }

        self.objects
            .retain(|_, o| o.promoted || timestamp - o.last_seen <= EVICTION_AFTER);
        Ok(promoted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const KMH: f64 = 1.0 / 3.6;

    #[test]
    fn published_calibration_points() {
        let p = ThresholdParams::default();
        assert_eq!(detection_threshold(50.0 * KMH, &p), Ok(5));
        assert_eq!(detection_threshold(80.0 * KMH, &p), Ok(3));
        assert_eq!(detection_threshold(100.0 * KMH, &p), Ok(2));
        assert_eq!(detection_threshold(13.89, &p), Ok(5));
        assert_eq!(detection_threshold(22.22, &p), Ok(3));
        assert_eq!(detection_threshold(27.78, &p), Ok(2));
    }

    #[test]
    fn clamps_and_errors() {
        let p = ThresholdParams::default();
        assert_eq!(detection_threshold(0.0, &p), Ok(5));
        assert_eq!(detection_threshold(1e-320, &p), Ok(5));
        assert_eq!(detection_threshold(200.0, &p), Ok(2));
        assert_eq!(detection_threshold(f64::INFINITY, &p), Ok(2));
        assert!(detection_threshold(-1.0, &p).is_err());
        assert!(detection_threshold(f64::NAN, &p).is_err());
    }

    fn matched(id: ObjectId) -> Match {
        Match {
            detection_index: 0,
            object_id: id,
            iou: 0.8,
            class: ObjectClass::PanelPassLeft,
            bottom_gap: 0.0,
        }
    }

    fn seen(id: ObjectId) -> ObservedObject {
        ObservedObject {
            object_id: id,
            world_contour: vec![WorldPoint::new(10.0, 3.0)],
        }
    }

    const V50: f64 = 13.89;

    #[test]
    fn promoted_on_fifth_match_at_50_kmh() {
        let mut t = ObjectTracker::new(ThresholdParams::default());
        for frame in 1..=5 {
            let p = t.update(&[matched(1)], &[seen(1)], V50, frame as f64 * 0.1).unwrap();
            assert_eq!(p.len(), usize::from(frame == 5), "frame {frame}");
        }
        assert!(t.get(1).unwrap().promoted);
        // no second promotion
        assert!(t.update(&[matched(1)], &[seen(1)], V50, 0.6).unwrap().is_empty());
    }

    #[test]
    fn lidar_only_sightings_count_after_a_match() {
        let mut t = ObjectTracker::new(ThresholdParams::default());
        t.update(&[matched(1)], &[seen(1)], V50, 0.1).unwrap();
        t.update(&[matched(1)], &[seen(1)], V50, 0.2).unwrap();
        assert!(t.update(&[], &[seen(1)], V50, 0.3).unwrap().is_empty());
        assert!(t.update(&[], &[seen(1)], V50, 0.4).unwrap().is_empty());
        let p = t.update(&[], &[seen(1)], V50, 0.5).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].detection_count, 5);
    }

    #[test]
    fn never_matched_object_is_never_promoted() {
        let mut t = ObjectTracker::new(ThresholdParams::default());
        for f in 0..10 {
            assert!(t.update(&[], &[seen(2)], V50, f as f64 * 0.1).unwrap().is_empty());
        }
        assert!(t.get(2).is_none());
    }

    #[test]
    fn threshold_follows_current_speed() {
        let mut t = ObjectTracker::new(ThresholdParams::default());
        t.update(&[matched(1)], &[seen(1)], V50, 0.1).unwrap();
        t.update(&[matched(1)], &[seen(1)], V50, 0.2).unwrap();
        // at 100 km/h two sightings already qualify
        let p = t.update(&[matched(1)], &[seen(1)], 27.78, 0.3).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn absent_unpromoted_ids_are_evicted() {
        let mut t = ObjectTracker::new(ThresholdParams::default());
        t.update(&[matched(1)], &[seen(1)], V50, 0.0).unwrap();
        t.update(&[], &[], V50, 2.0).unwrap();
        assert!(t.get(1).is_some());
        t.update(&[], &[], V50, 2.05).unwrap();
        assert!(t.get(1).is_none());
    }

    #[test]
    fn promoted_ids_survive_absence() {
        let mut t = ObjectTracker::new(ThresholdParams::default());
        for f in 1..=5 {
            t.update(&[matched(1)], &[seen(1)], V50, f as f64 * 0.1).unwrap();
        }
        t.update(&[], &[], V50, 10.0).unwrap();
        assert!(t.get(1).is_some());
    }
}
