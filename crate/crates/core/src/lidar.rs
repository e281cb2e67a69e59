//! LiDAR contour objects: image-space contour boxes and world-frame contours.
//!
//! Contour points arrive planar in the robot frame. Each point is lifted to the
//! configured contour plane (bottom line) and raised by the assumed object
//! height (top line), both are taken through the robot→camera extrinsic and
//! projected. Lines leaving the image are cut at the image border.

use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::geometry::{project_to_image, CameraIntrinsics, PixelBox, Pose2D, RigidTransform3D, WorldPoint};
use crate::math;
use crate::ObjectId;

/// Height covering a 1.3 m vertical panel plus a 0.3 m warning light.
pub const DEFAULT_OBJECT_HEIGHT: f64 = 1.60;

/// Planar contour of one obstacle as segmented by the LiDAR ECU.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ContourObject {
    pub object_id: ObjectId,
    /// Ordered `(x, y)` points in the robot frame, meters.
    pub points: Vec<[f64; 2]>,
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SensorModelParams {
    pub assumed_object_height: f64,
    /// z of the contour plane in the robot frame.
    pub sensor_mount_height: f64,
    /// robot → camera
    pub extrinsic: RigidTransform3D,
    pub intrinsics: CameraIntrinsics,
}

impl Default for SensorModelParams {
    fn default() -> Self {
        Self {
            assumed_object_height: DEFAULT_OBJECT_HEIGHT,
            sensor_mount_height: 0.0,
            extrinsic: RigidTransform3D::level_forward_camera([1.5, 0.0, 1.4]),
            intrinsics: CameraIntrinsics {
                fx: 400.0,
                fy: 400.0,
                cx: 320.0,
                cy: 176.0,
                width: 640,
                height: 352,
            },
        }
    }
}

impl SensorModelParams {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.assumed_object_height > 0.0 && self.assumed_object_height.is_finite()) {
            return Err("assumed_object_height");
        }
        if !self.sensor_mount_height.is_finite() {
            return Err("sensor_mount_height");
        }
        Ok(())
    }
}

/// Image-space footprint of a contour object.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourBoxImage {
    pub object_id: ObjectId,
    pub bbox: PixelBox,
    /// Projected (and border-clipped) bottom contour, in contour order.
    pub bottom_line: Vec<[f64; 2]>,
    /// Minimum distance of the contour to the robot origin, meters.
    pub range: f64,
    /// Set when any part of the contour was cut at the image border.
    pub clipped: bool,
}

impl ContourBoxImage {
    /// Mean pixel row of the bottom line; falls back to the box bottom when
    /// the bottom line left the image.
    pub fn bottom_line_y(&self) -> f64 {
        if self.bottom_line.is_empty() {
            return self.bbox.y_max;
        }
        self.bottom_line.iter().map(|p| p[1]).sum::<f64>() / self.bottom_line.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourBoxRejection {
    EmptyContour,
    /// No contour point lies in front of the camera.
    BehindCamera,
    /// Everything projects outside the image.
    OutsideImage,
}

impl fmt::Display for ContourBoxRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContourBoxRejection::EmptyContour => write!(f, "contour has no points"),
            ContourBoxRejection::BehindCamera => write!(f, "contour lies behind the camera"),
            ContourBoxRejection::OutsideImage => write!(f, "contour projects outside the image"),
        }
    }
}

impl core::error::Error for ContourBoxRejection {}

#[derive(Debug, Clone, PartialEq)]
pub struct ClippedPolyline {
    pub points: Vec<[f64; 2]>,
    pub clipped: bool,
}

fn inside(p: [f64; 2], width: f64, height: f64) -> bool {
    (0.0..=width).contains(&p[0]) && (0.0..=height).contains(&p[1])
}

// Liang–Barsky against [0, width] × [0, height].
fn clip_segment(a: [f64; 2], b: [f64; 2], width: f64, height: f64) -> Option<([f64; 2], [f64; 2])> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    for (p, q) in [(-d[0], a[0]), (d[0], width - a[0]), (-d[1], a[1]), (d[1], height - a[1])] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                if r > t1 {
                    return None;
                }
                t0 = t0.max(r);
            } else {
                if r < t0 {
                    return None;
                }
                t1 = t1.min(r);
            }
        }
    }
    let at = |t: f64, end: [f64; 2]| {
        if t == 0.0 {
            a
        } else if t == 1.0 {
            end
        } else {
            [(a[0] + t * d[0]).clamp(0.0, width), (a[1] + t * d[1]).clamp(0.0, height)]
        }
    };
    Some((at(t0, b), at(t1, b)))
}

/// Cuts a projected polyline at the image border. Each edge crossing the
/// border contributes its exact border intersection in place of the outside
/// vertex. A polyline entirely outside the image yields no points.
pub fn clip_to_image_boundary(polyline: &[[f64; 2]], width: f64, height: f64) -> ClippedPolyline {
    if polyline.iter().all(|p| inside(*p, width, height)) {
        return ClippedPolyline {
            points: polyline.to_vec(),
            clipped: false,
        };
    }
    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut push = |p: [f64; 2]| {
        if points.last() != Some(&p) {
            points.push(p);
        }
    };
    for w in polyline.windows(2) {
        if let Some((s, e)) = clip_segment(w[0], w[1], width, height) {
            push(s);
            push(e);
        }
    }
    ClippedPolyline { points, clipped: true }
}

/// Minimum Euclidean distance of the contour to the robot origin.
pub fn object_range(c: &ContourObject) -> f64 {
    c.points
        .iter()
        .map(|p| math::hypot(p[0], p[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Builds the image contour box of `c`.
pub fn build_contour_box(c: &ContourObject, m: &SensorModelParams) -> Result<ContourBoxImage, ContourBoxRejection> {
    if c.points.is_empty() {
        return Err(ContourBoxRejection::EmptyContour);
    }
    let bottom_z = m.sensor_mount_height;
    let top_z = m.sensor_mount_height + m.assumed_object_height;
    let project = |p: &[f64; 2], z: f64| project_to_image(m.extrinsic.apply([p[0], p[1], z]), &m.intrinsics);

    let bottom: Vec<[f64; 2]> = c.points.iter().filter_map(|p| project(p, bottom_z)).collect();
    let top: Vec<[f64; 2]> = c.points.iter().filter_map(|p| project(p, top_z)).collect();
    if bottom.is_empty() && top.is_empty() {
        return Err(ContourBoxRejection::BehindCamera);
    }

    let (w, h) = (m.intrinsics.width_f(), m.intrinsics.height_f());
    let bottom = clip_to_image_boundary(&bottom, w, h);
    let top = clip_to_image_boundary(&top, w, h);
    let bbox = PixelBox::enclosing(bottom.points.iter().chain(top.points.iter()).copied())
        .ok_or(ContourBoxRejection::OutsideImage)?;

    Ok(ContourBoxImage {
        object_id: c.object_id,
        bbox,
        clipped: bottom.clipped || top.clipped,
        bottom_line: bottom.points,
        range: object_range(c),
    })
}

/// Transforms the contour into the local world frame using the vehicle pose.
pub fn contour_to_world(c: &ContourObject, vehicle_pose: &Pose2D) -> Vec<WorldPoint> {
    c.points
        .iter()
        .map(|p| WorldPoint::from(vehicle_pose.transform_point(*p)))
        .collect()
}
