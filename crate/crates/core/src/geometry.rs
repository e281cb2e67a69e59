//! Coordinate frames, rigid transforms, pinhole projection and the planar
//! polygon primitives shared by the rest of the pipeline.
//!
//! Frame conventions:
//! - robot frame: +x forward, +y left, +z up, origin on the ground plane;
//! - camera frame: +z forward (optical axis), +x right, +y down;
//! - local world frame: fixed at the first vehicle pose of a session.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::math;

/// Tolerance used when checking that a rotation matrix is orthonormal.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-9;

/// Points closer to the image plane than this are rejected by projection.
pub const MIN_PROJECTION_DEPTH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    NonOrthonormalRotation,
    NonFinite,
    InvalidIntrinsics(&'static str),
    InvalidBox,
    DegenerateAxis,
    InvalidAnchor(&'static str),
    MissingAnchor,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::NonOrthonormalRotation => {
                write!(f, "rotation matrix is not orthonormal with determinant +1")
            }
            GeometryError::NonFinite => write!(f, "non-finite coordinate"),
            GeometryError::InvalidIntrinsics(field) => write!(f, "invalid camera intrinsics: {field}"),
            GeometryError::InvalidBox => write!(f, "box corners are not ordered"),
            GeometryError::DegenerateAxis => write!(f, "axis endpoints coincide"),
            GeometryError::InvalidAnchor(field) => write!(f, "invalid UTM anchor: {field}"),
            GeometryError::MissingAnchor => write!(f, "no UTM anchor configured"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// Wraps an angle into (-π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = math::fmod(PI - angle, two_pi);
    if r < 0.0 {
        r += two_pi;
    }
    let out = PI - r;
    if out <= -PI {
        out + two_pi
    } else {
        out
    }
}

/// Planar vehicle pose in the local world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    /// Radians, counter-clockwise from local-world +x.
    pub heading: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub const fn identity() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
        }
    }

    /// Unit vector along the heading.
    pub fn direction(&self) -> [f64; 2] {
        [math::cos(self.heading), math::sin(self.heading)]
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Maps a point given in this pose's body frame into the parent frame.
    pub fn transform_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = (math::sin(self.heading), math::cos(self.heading));
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }

    /// Maps a point given in the parent frame into this pose's body frame.
    pub fn inverse_transform_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = (math::sin(self.heading), math::cos(self.heading));
        let dx = p[0] - self.x;
        let dy = p[1] - self.y;
        [c * dx + s * dy, -s * dx + c * dy]
    }

    /// `self ∘ other`: `other` is expressed in the body frame of `self`.
    pub fn compose(&self, other: &Pose2D) -> Pose2D {
        let [x, y] = self.transform_point([other.x, other.y]);
        Pose2D::new(x, y, self.heading + other.heading)
    }

    pub fn inverse(&self) -> Pose2D {
        let [x, y] = Pose2D::new(0.0, 0.0, -self.heading).transform_point([-self.x, -self.y]);
        Pose2D::new(x, y, -self.heading)
    }
}

/// A point in the local world frame. `z` is carried through when known but
/// ignored by all planar operations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub z: Option<f64>,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y, z: None }
    }

    pub const fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_none_or(f64::is_finite)
    }

    pub fn distance(&self, other: &WorldPoint) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }
}

impl From<[f64; 2]> for WorldPoint {
    fn from(p: [f64; 2]) -> Self {
        WorldPoint::new(p[0], p[1])
    }
}

/// Proper rigid transform `p ↦ R·p + t` in 3D.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawRigidTransform"))]
pub struct RigidTransform3D {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

#[cfg(feature = "serde")]
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRigidTransform {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

#[cfg(feature = "serde")]
impl TryFrom<RawRigidTransform> for RigidTransform3D {
    type Error = GeometryError;

    fn try_from(raw: RawRigidTransform) -> Result<Self, Self::Error> {
        RigidTransform3D::new(raw.rotation, raw.translation)
    }
}

impl RigidTransform3D {
    pub fn new(rotation: [[f64; 3]; 3], translation: [f64; 3]) -> Result<Self, GeometryError> {
        if rotation.iter().flatten().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        // R·Rᵀ = I and det R = +1
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| rotation[i][k] * rotation[j][k]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if math::abs(dot - expected) > ORTHONORMAL_TOLERANCE {
                    return Err(GeometryError::NonOrthonormalRotation);
                }
            }
        }
        if math::abs(det3(&rotation) - 1.0) > ORTHONORMAL_TOLERANCE {
            return Err(GeometryError::NonOrthonormalRotation);
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub const fn identity() -> Self {
        Self {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
        }
    }

    /// Robot→camera transform for a forward-looking camera mounted level at
    /// `position` (robot frame, meters).
    pub fn level_forward_camera(position: [f64; 3]) -> Self {
        // camera x = -robot y, camera y = -robot z, camera z = robot x
        let rotation = [[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]];
        let rp = mat_vec(&rotation, position);
        Self {
            rotation,
            translation: [-rp[0], -rp[1], -rp[2]],
        }
    }

    pub const fn rotation(&self) -> &[[f64; 3]; 3] {
        &self.rotation
    }

    pub const fn translation(&self) -> [f64; 3] {
        self.translation
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let r = mat_vec(&self.rotation, p);
        [
            r[0] + self.translation[0],
            r[1] + self.translation[1],
            r[2] + self.translation[2],
        ]
    }

    pub fn inverse(&self) -> Self {
        let rt = transpose(&self.rotation);
        let t = mat_vec(&rt, self.translation);
        Self {
            rotation: rt,
            translation: [-t[0], -t[1], -t[2]],
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform3D) -> Self {
        let mut rotation = [[0.0; 3]; 3];
        for (i, row) in rotation.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.rotation[i][k] * other.rotation[k][j]).sum();
            }
        }
        Self {
            rotation,
            translation: self.apply(other.translation),
        }
    }
}

fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = *v;
        }
    }
    out
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Pinhole intrinsics at the detection resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawIntrinsics"))]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

#[cfg(feature = "serde")]
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
}

#[cfg(feature = "serde")]
impl TryFrom<RawIntrinsics> for CameraIntrinsics {
    type Error = GeometryError;

    fn try_from(r: RawIntrinsics) -> Result<Self, Self::Error> {
        CameraIntrinsics::new(r.fx, r.fy, r.cx, r.cy, r.width, r.height)
    }
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self, GeometryError> {
        if !(fx > 0.0 && fx.is_finite()) {
            return Err(GeometryError::InvalidIntrinsics("fx"));
        }
        if !(fy > 0.0 && fy.is_finite()) {
            return Err(GeometryError::InvalidIntrinsics("fy"));
        }
        if !(cx >= 0.0 && cx < f64::from(width)) {
            return Err(GeometryError::InvalidIntrinsics("cx"));
        }
        if !(cy >= 0.0 && cy < f64::from(height)) {
            return Err(GeometryError::InvalidIntrinsics("cy"));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    pub fn width_f(&self) -> f64 {
        f64::from(self.width)
    }

    pub fn height_f(&self) -> f64 {
        f64::from(self.height)
    }
}

/// Projects a camera-frame point to pixels. `None` when the point lies behind
/// or on the image plane.
pub fn project_to_image(p: [f64; 3], k: &CameraIntrinsics) -> Option<[f64; 2]> {
    if !(p[2] > MIN_PROJECTION_DEPTH) {
        return None;
    }
    Some([k.fx * p[0] / p[2] + k.cx, k.fy * p[1] / p[2] + k.cy])
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PixelBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl PixelBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GeometryError> {
        if [x_min, y_min, x_max, y_max].iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if x_min > x_max || y_min > y_max {
            return Err(GeometryError::InvalidBox);
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Tight box around `points`; `None` for an empty iterator.
    pub fn enclosing<I: IntoIterator<Item = [f64; 2]>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = PixelBox {
            x_min: first[0],
            y_min: first[1],
            x_max: first[0],
            y_max: first[1],
        };
        for p in it {
            b.x_min = b.x_min.min(p[0]);
            b.y_min = b.y_min.min(p[1]);
            b.x_max = b.x_max.max(p[0]);
            b.y_max = b.y_max.max(p[1]);
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Clamps the box into `[0, width] × [0, height]`.
    pub fn clamped(&self, width: f64, height: f64) -> Self {
        let cx = |v: f64| v.clamp(0.0, width);
        let cy = |v: f64| v.clamp(0.0, height);
        PixelBox {
            x_min: cx(self.x_min),
            y_min: cy(self.y_min),
            x_max: cx(self.x_max),
            y_max: cy(self.y_max),
        }
    }

    pub fn intersection_area(&self, other: &PixelBox) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }
}

/// Intersection over union. Disjoint boxes and pairs of zero-area boxes give 0.
pub fn iou(a: &PixelBox, b: &PixelBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Session anchor for the affine local-world → UTM map.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawAnchor"))]
pub struct UtmAnchor {
    pub easting: f64,
    pub northing: f64,
    pub zone: String,
    /// Rotation from local-world axes to UTM grid axes, radians.
    pub heading_offset: f64,
}

#[cfg(feature = "serde")]
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnchor {
    easting: f64,
    northing: f64,
    zone: String,
    #[serde(default)]
    heading_offset: f64,
}

#[cfg(feature = "serde")]
impl TryFrom<RawAnchor> for UtmAnchor {
    type Error = GeometryError;

    fn try_from(r: RawAnchor) -> Result<Self, Self::Error> {
        UtmAnchor::new(r.easting, r.northing, r.zone, r.heading_offset)
    }
}

impl UtmAnchor {
    pub fn new(easting: f64, northing: f64, zone: String, heading_offset: f64) -> Result<Self, GeometryError> {
        if !(100_000.0..900_000.0).contains(&easting) {
            return Err(GeometryError::InvalidAnchor("easting"));
        }
        if !(northing >= 0.0 && northing.is_finite()) {
            return Err(GeometryError::InvalidAnchor("northing"));
        }
        if !heading_offset.is_finite() {
            return Err(GeometryError::InvalidAnchor("heading_offset"));
        }
        if zone.is_empty() {
            return Err(GeometryError::InvalidAnchor("zone"));
        }
        Ok(Self {
            easting,
            northing,
            zone,
            heading_offset,
        })
    }

    pub fn to_utm(&self, p: &WorldPoint) -> [f64; 2] {
        let (s, c) = (math::sin(self.heading_offset), math::cos(self.heading_offset));
        [
            self.easting + c * p.x - s * p.y,
            self.northing + s * p.x + c * p.y,
        ]
    }

    pub fn to_local(&self, utm: [f64; 2]) -> WorldPoint {
        let (s, c) = (math::sin(self.heading_offset), math::cos(self.heading_offset));
        let de = utm[0] - self.easting;
        let dn = utm[1] - self.northing;
        WorldPoint::new(c * de + s * dn, -s * de + c * dn)
    }
}

/// Local world → (easting, northing). Fails when no anchor is configured.
pub fn local_to_utm(p: &WorldPoint, anchor: Option<&UtmAnchor>) -> Result<[f64; 2], GeometryError> {
    anchor.map(|a| a.to_utm(p)).ok_or(GeometryError::MissingAnchor)
}

/// z-component of `(a - o) × (b - o)`.
#[inline]
pub fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Perpendicular distance from `p` to the infinite line through `a` and `b`.
pub fn point_to_axis_distance(p: &WorldPoint, a: &WorldPoint, b: &WorldPoint) -> Result<f64, GeometryError> {
    let len = a.distance(b);
    if len == 0.0 {
        return Err(GeometryError::DegenerateAxis);
    }
    Ok(math::abs(cross(a.xy(), b.xy(), p.xy())) / len)
}

/// Convex hull by monotone chain, counter-clockwise, starting at the
/// lowest-x (then lowest-y) point. Collinear boundary points are dropped, so
/// collinear input yields its two extreme points and identical input a single
/// point.
pub fn convex_hull(points: &[WorldPoint]) -> Vec<WorldPoint> {
    let mut pts: Vec<WorldPoint> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() <= 2 {
        return pts;
    }

    let mut hull: Vec<WorldPoint> = Vec::with_capacity(pts.len() + 1);
    for p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2].xy(), hull[hull.len() - 1].xy(), p.xy()) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2].xy(), hull[hull.len() - 1].xy(), p.xy()) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

/// Signed shoelace area (positive for counter-clockwise order).
pub fn signed_area(polygon: &[WorldPoint]) -> f64 {
    if polygon.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..polygon.len() {
        let a = polygon[i];
        let b = polygon[(i + 1) % polygon.len()];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

/// Mean of the vertices.
pub fn vertex_centroid(points: &[WorldPoint]) -> Option<WorldPoint> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Some(WorldPoint::new(sx / n, sy / n))
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return math::hypot(p[0] - a[0], p[1] - a[1]);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    math::hypot(p[0] - (a[0] + t * ab[0]), p[1] - (a[1] + t * ab[1]))
}

/// Distance from `p` to a convex hull as returned by [`convex_hull`]; zero for
/// points inside or on the boundary (within `tolerance`).
pub fn distance_to_convex_hull(hull: &[WorldPoint], p: &WorldPoint, tolerance: f64) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => hull[0].distance(p),
        2 => point_segment_distance(p.xy(), hull[0].xy(), hull[1].xy()),
        n => {
            let inside = (0..n).all(|i| {
                let a = hull[i].xy();
                let b = hull[(i + 1) % n].xy();
                let len = math::hypot(b[0] - a[0], b[1] - a[1]);
                cross(a, b, p.xy()) >= -tolerance * len
            });
            if inside {
                return 0.0;
            }
            (0..n)
                .map(|i| point_segment_distance(p.xy(), hull[i].xy(), hull[(i + 1) % n].xy()))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn intrinsics() -> CameraIntrinsics {
        CameraIntrinsics::new(400.0, 400.0, 320.0, 176.0, 640, 352).unwrap()
    }

    #[test]
    fn projection_examples() {
        let k = intrinsics();
        assert_eq!(project_to_image([0.0, 0.0, 10.0], &k), Some([320.0, 176.0]));
        assert_eq!(project_to_image([1.0, 0.0, 2.0], &k), Some([520.0, 176.0]));
        assert_eq!(project_to_image([0.0, 0.0, -1.0], &k), None);
        assert_eq!(project_to_image([0.0, 0.0, 1e-7], &k), None);
    }

    #[test]
    fn iou_examples() {
        let a = PixelBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let far = PixelBox::new(20.0, 20.0, 30.0, 30.0).unwrap();
        let shifted = PixelBox::new(5.0, 0.0, 15.0, 10.0).unwrap();
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &far), 0.0);
        assert_abs_diff_eq!(iou(&a, &shifted), 1.0 / 3.0, epsilon = 1e-12);

        let dot = PixelBox::new(3.0, 3.0, 3.0, 3.0).unwrap();
        assert_eq!(iou(&dot, &dot), 0.0);
    }

    #[test]
    fn iou_matches_pixel_counting() {
        // integer-pixel brute force for the shifted-square example
        let mut inter = 0;
        let mut union = 0;
        for x in 0..15 {
            for _row in 0..10 {
                let in_a = x < 10;
                let in_b = (5..15).contains(&x);
                if in_a && in_b {
                    inter += 1;
                }
                if in_a || in_b {
                    union += 1;
                }
            }
        }
        let a = PixelBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let b = PixelBox::new(5.0, 0.0, 15.0, 10.0).unwrap();
        assert_abs_diff_eq!(iou(&a, &b), inter as f64 / union as f64, epsilon = 1e-12);
    }

    #[test]
    fn box_rejects_unordered_corners() {
        assert_eq!(PixelBox::new(5.0, 0.0, 1.0, 1.0), Err(GeometryError::InvalidBox));
    }

    #[test]
    fn hull_examples() {
        let tri = vec![WorldPoint::new(0.0, 0.0), WorldPoint::new(4.0, 0.0), WorldPoint::new(0.0, 3.0)];
        let h = convex_hull(&tri);
        assert_eq!(h.len(), 3);
        assert!(signed_area(&h) > 0.0);

        let square = vec![
            WorldPoint::new(0.0, 0.0),
            WorldPoint::new(2.0, 0.0),
            WorldPoint::new(2.0, 2.0),
            WorldPoint::new(0.0, 2.0),
            WorldPoint::new(1.0, 1.0),
        ];
        let h = convex_hull(&square);
        assert_eq!(h.len(), 4);
        assert!(!h.contains(&WorldPoint::new(1.0, 1.0)));
    }

    #[test]
    fn hull_degenerate_inputs() {
        let same = vec![WorldPoint::new(1.0, 1.0); 4];
        assert_eq!(convex_hull(&same), vec![WorldPoint::new(1.0, 1.0)]);

        let line = vec![
            WorldPoint::new(2.0, 0.0),
            WorldPoint::new(0.0, 0.0),
            WorldPoint::new(1.0, 0.0),
            WorldPoint::new(3.0, 0.0),
        ];
        assert_eq!(convex_hull(&line), vec![WorldPoint::new(0.0, 0.0), WorldPoint::new(3.0, 0.0)]);
    }

    #[test]
    fn axis_distance_examples() {
        let o = WorldPoint::new(0.0, 0.0);
        let d = point_to_axis_distance(&WorldPoint::new(5.0, 3.0), &o, &WorldPoint::new(10.0, 0.0)).unwrap();
        assert_abs_diff_eq!(d, 3.0, epsilon = 1e-12);

        let p = WorldPoint::new(10.0, 0.0);
        let b = WorldPoint::new(10.0, 5.0);
        let d = point_to_axis_distance(&p, &o, &b).unwrap();
        // projection oracle: |p - proj_ab(p)|
        let t = (p.x * b.x + p.y * b.y) / (b.x * b.x + b.y * b.y);
        let oracle = ((p.x - t * b.x).powi(2) + (p.y - t * b.y).powi(2)).sqrt();
        assert_abs_diff_eq!(d, 50.0 / 125f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d, oracle, epsilon = 1e-12);

        let on = WorldPoint::new(4.0, 2.0);
        assert_abs_diff_eq!(point_to_axis_distance(&on, &o, &b).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(point_to_axis_distance(&on, &o, &o), Err(GeometryError::DegenerateAxis));
    }

    #[test]
    fn point_on_axis_has_zero_distance() {
        let a = WorldPoint::new(1.0, 1.0);
        let b = WorldPoint::new(3.0, 3.0);
        let d = point_to_axis_distance(&WorldPoint::new(7.0, 7.0), &a, &b).unwrap();
        assert_abs_diff_eq!(d, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn utm_examples() {
        let anchor = UtmAnchor::new(390_000.0, 5_820_000.0, "33U".into(), 0.0).unwrap();
        assert_eq!(local_to_utm(&WorldPoint::new(0.0, 0.0), Some(&anchor)).unwrap(), [390_000.0, 5_820_000.0]);
        assert_eq!(local_to_utm(&WorldPoint::new(10.0, 5.0), Some(&anchor)).unwrap(), [390_010.0, 5_820_005.0]);

        let rotated = UtmAnchor::new(390_000.0, 5_820_000.0, "33U".into(), PI / 2.0).unwrap();
        let [e, n] = rotated.to_utm(&WorldPoint::new(10.0, 0.0));
        assert_abs_diff_eq!(e, 390_000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(n, 5_820_010.0, epsilon = 1e-9);

        assert_eq!(local_to_utm(&WorldPoint::new(0.0, 0.0), None), Err(GeometryError::MissingAnchor));
    }

    #[test]
    fn utm_anchor_validation() {
        assert!(UtmAnchor::new(50_000.0, 0.0, "33U".into(), 0.0).is_err());
        assert!(UtmAnchor::new(900_000.0, 0.0, "33U".into(), 0.0).is_err());
        assert!(UtmAnchor::new(500_000.0, -1.0, "33U".into(), 0.0).is_err());
    }

    #[test]
    fn intrinsics_validation() {
        assert_eq!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 4, 4), Err(GeometryError::InvalidIntrinsics("fx")));
        assert_eq!(CameraIntrinsics::new(1.0, 1.0, 4.0, 1.0, 4, 4), Err(GeometryError::InvalidIntrinsics("cx")));
    }

    #[test]
    fn rigid_transform_rejects_scaled_rotation() {
        let r = [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(RigidTransform3D::new(r, [0.0; 3]), Err(GeometryError::NonOrthonormalRotation));
        let reflection = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(RigidTransform3D::new(reflection, [0.0; 3]), Err(GeometryError::NonOrthonormalRotation));
    }

    #[test]
    fn level_camera_sees_forward_point_on_axis() {
        let t = RigidTransform3D::level_forward_camera([1.5, 0.0, 1.4]);
        assert!(RigidTransform3D::new(*t.rotation(), t.translation()).is_ok());
        let cam = t.apply([11.5, 0.0, 1.4]);
        assert_abs_diff_eq!(cam[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cam[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cam[2], 10.0, epsilon = 1e-12);
        // a point to the left of the vehicle lands at negative camera x
        assert!(t.apply([11.5, 2.0, 1.4])[0] < 0.0);
    }

    #[test]
    fn angle_normalization_range() {
        assert_abs_diff_eq!(normalize_angle(PI), PI);
        assert_abs_diff_eq!(normalize_angle(-PI), PI);
        assert_abs_diff_eq!(normalize_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(0.25), 0.25);
    }

    #[test]
    fn pose_composition_round_trip() {
        let a = Pose2D::new(3.0, -2.0, 0.7);
        let b = Pose2D::new(-1.0, 4.0, -2.1);
        let ab = a.compose(&b);
        let back = a.inverse().compose(&ab);
        assert_abs_diff_eq!(back.x, b.x, epsilon = 1e-12);
        assert_abs_diff_eq!(back.y, b.y, epsilon = 1e-12);
        assert_abs_diff_eq!(back.heading, b.heading, epsilon = 1e-12);
    }

    #[test]
    fn hull_distance_inside_and_outside() {
        let sq = convex_hull(&[
            WorldPoint::new(0.0, 0.0),
            WorldPoint::new(4.0, 0.0),
            WorldPoint::new(4.0, 4.0),
            WorldPoint::new(0.0, 4.0),
        ]);
        assert_eq!(distance_to_convex_hull(&sq, &WorldPoint::new(1.0, 1.0), 1e-9), 0.0);
        assert_abs_diff_eq!(distance_to_convex_hull(&sq, &WorldPoint::new(6.0, 2.0), 1e-9), 2.0, epsilon = 1e-12);
    }
}
