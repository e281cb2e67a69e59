//! Camera and LiDAR late fusion for roadwork detection.
//!
//! Detector boxes are associated with projected LiDAR contours, confirmed
//! over several frames with a speed-dependent threshold, and aggregated into
//! roadwork sites measured in a local world frame. The crate is `no_std` and
//! only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;

pub mod annotation;
pub mod detection;
pub mod engine;
pub mod fusion;
pub mod geometry;
pub mod lidar;
pub mod odometry;
pub mod sites;
pub mod tracking;

/// Object id assigned by the LiDAR ECU.
pub type ObjectId = u64;
pub type SiteId = u32;

pub use annotation::{AnnotationEntry, FrameAnnotation, Summary};
pub use detection::{ConfidencePolicy, Detection, DetectionRecord, ObjectClass};
pub use engine::{ConfigError, CycleOutput, EngineConfig, EngineError, RoadworkEngine};
pub use fusion::{Match, MatchParams};
pub use geometry::{CameraIntrinsics, GeometryError, PixelBox, Pose2D, RigidTransform3D, UtmAnchor, WorldPoint};
pub use lidar::{ContourBoxImage, ContourObject, SensorModelParams};
pub use odometry::{OdometrySample, VehicleState};
pub use sites::{OutputFrame, RoadworkSite, SeparationPolicy, SiteBook, SiteDimensions, SiteRecord};
pub use tracking::{ThresholdParams, TrackedObject};
