//! One detection cycle per LiDAR message.
//!
//! The engine buffers odometry and camera records and runs the full chain
//! when contour objects arrive: pose lookup, contour boxes, pairing and
//! gating, matching, counting, site assignment, ghosts and finalization.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::annotation::{summarize, AnnotationEntry, FrameAnnotation, Summary};
use crate::detection::{gate_detections, pair_index, ConfidencePolicy, DetectionRecord, ObjectClass};
use crate::fusion::{match_frame, MatchParams};
use crate::geometry::UtmAnchor;
use crate::lidar::{build_contour_box, contour_to_world, object_range, ContourObject, SensorModelParams};
use crate::odometry::{OdometryError, OdometrySample, OdometryTrack};
use crate::sites::{dimensions, SeparationPolicy, SiteBook, SiteDimensions, SiteRecord};
use crate::tracking::{detection_threshold, ObjectTracker, ObservedObject, ThresholdParams, TrackingError};
use crate::{ObjectId, SiteId};

// camera records this much older than the newest LiDAR cycle are dropped
const DETECTION_RETENTION: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EngineConfig {
    pub calibration: SensorModelParams,
    pub threshold: ThresholdParams,
    pub confidence: ConfidencePolicy,
    pub matching: MatchParams,
    pub separation: SeparationPolicy,
    pub utm_anchor: Option<UtmAnchor>,
}

impl EngineConfig {
    /// Checks every section; the error names the offending field as
    /// `section.field`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let section = |name: &'static str| move |field: &'static str| ConfigError { section: name, field };
        self.calibration.validate().map_err(section("calibration"))?;
        self.threshold.validate().map_err(section("threshold"))?;
        self.confidence.validate().map_err(section("confidence"))?;
        self.matching.validate().map_err(section("matching"))?;
        self.separation.validate().map_err(section("separation"))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfigError {
    pub section: &'static str,
    pub field: &'static str,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid value for {}.{}", self.section, self.field)
    }
}

impl core::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineError {
    Odometry(OdometryError),
    Tracking(TrackingError),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Odometry(e) => e.fmt(f),
            EngineError::Tracking(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for EngineError {}

impl From<OdometryError> for EngineError {
    fn from(e: OdometryError) -> Self {
        EngineError::Odometry(e)
    }
}

impl From<TrackingError> for EngineError {
    fn from(e: TrackingError) -> Self {
        EngineError::Tracking(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleOutput {
    pub annotation: FrameAnnotation,
    /// Ids promoted this cycle.
    pub promoted: Vec<ObjectId>,
    /// Sites finished this cycle.
    pub finished: Vec<SiteRecord>,
}

#[derive(Debug, Clone)]
pub struct RoadworkEngine {
    config: EngineConfig,
    odometry: OdometryTrack,
    detections: VecDeque<DetectionRecord>,
    tracker: ObjectTracker,
    book: SiteBook,
    finished: Vec<(SiteId, SiteDimensions)>,
}

impl RoadworkEngine {
    pub fn new(config: EngineConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Self {
            odometry: OdometryTrack::new(),
            detections: VecDeque::new(),
            tracker: ObjectTracker::new(config.threshold),
            book: SiteBook::new(config.separation),
            finished: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn tracker(&self) -> &ObjectTracker {
        &self.tracker
    }

    pub fn sites(&self) -> &SiteBook {
        &self.book
    }

    pub fn odometry(&self) -> &OdometryTrack {
        &self.odometry
    }

    pub fn push_odometry(&mut self, sample: OdometrySample) -> Result<(), OdometryError> {
        self.odometry.push(sample)
    }

    /// Buffers a camera record until a LiDAR cycle consumes it.
    pub fn push_detections(&mut self, record: DetectionRecord) {
        self.detections.push_back(record);
    }

    /// Finished sites followed by active ones.
    pub fn summary(&self) -> Summary {
        let active = self.book.sites().iter().map(|s| (s.site_id, dimensions(s)));
        summarize(self.finished.iter().copied().chain(active))
    }

    /// Runs one cycle for the contour objects of a LiDAR message at `t`.
    /// A paired camera record is consumed and not reused by later cycles.
    pub fn process_lidar(&mut self, t: f64, objects: &[ContourObject]) -> Result<CycleOutput, EngineError> {
        let state = self.odometry.state_at(t)?;
        let threshold = detection_threshold(state.speed, &self.config.threshold)?;
        let pose = state.pose;
        let cfg = &self.config;

        let in_range: Vec<&ContourObject> = objects
            .iter()
            .filter(|o| !o.points.is_empty() && object_range(o) <= cfg.matching.tracking_range)
            .collect();
        let observed: Vec<ObservedObject> = in_range
            .iter()
            .map(|o| ObservedObject {
                object_id: o.object_id,
                world_contour: contour_to_world(o, &pose),
            })
            .collect();
        let boxes: Vec<_> = in_range
            .iter()
            .filter_map(|o| build_contour_box(o, &cfg.calibration).ok())
            .collect();
        let visible: BTreeSet<ObjectId> = boxes.iter().map(|b| b.object_id).collect();

        while self.detections.front().is_some_and(|r| t - r.timestamp > DETECTION_RETENTION) {
            self.detections.pop_front();
        }
        let gated = match pair_index(self.detections.make_contiguous(), t) {
            Some(i) => {
                let record = self.detections.remove(i).expect("paired index is in range");
                gate_detections(&record.detections, &cfg.confidence)
            }
            None => Vec::new(),
        };
        let matches = match_frame(&gated, &boxes, &cfg.matching);

        let promoted = self.tracker.update(&matches, &observed, state.speed, t)?;
        for obj in &promoted {
            self.book.assign(obj, &pose, state.arc_length, t);
        }
        self.book.merge_split_sites();
        self.book.remove_nested();
        self.book.update_ghosts(&visible, &pose);

        let matched: BTreeMap<ObjectId, (ObjectClass, f64)> =
            matches.iter().map(|m| (m.object_id, (m.class, m.iou))).collect();
        let mut entries = Vec::new();
        for b in &boxes {
            let site = self
                .book
                .sites()
                .iter()
                .find_map(|s| s.members.iter().find(|m| m.object_id == b.object_id).map(|m| (s.site_id, m.class)));
            let (class, iou) = match (matched.get(&b.object_id), site) {
                (Some(&(class, iou)), _) => (class, Some(iou)),
                (None, Some((_, class))) => (class, None),
                (None, None) => continue,
            };
            entries.push(AnnotationEntry::boxed(b.object_id, class, &b.bbox, site.map(|s| s.0), iou));
        }
        for site in self.book.sites() {
            for id in &site.ghosts {
                if let Some(m) = site.members.iter().find(|m| m.object_id == *id) {
                    entries.push(AnnotationEntry::ghost(*id, m.class, site.site_id));
                }
            }
        }
        entries.sort_by_key(|e| (e.ghost, e.object_id));
        let annotation = FrameAnnotation {
            t,
            speed: state.speed,
            detection_threshold: threshold,
            objects: entries,
        };

        let fin = self.book.finalize_check(state.arc_length, self.config.utm_anchor.as_ref());
        self.finished
            .extend(fin.records.iter().map(|r| (r.site_id, r.dimensions)));
        if fin.reset {
            self.tracker.reset();
        }

        Ok(CycleOutput {
            annotation,
            promoted: promoted.iter().map(|o| o.object_id).collect(),
            finished: fin.records,
        })
    }
}
