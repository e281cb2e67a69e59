use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use roadwork_core::geometry::{normalize_angle, signed_area, PixelBox, Pose2D, WorldPoint, MIN_PROJECTION_DEPTH};
use roadwork_core::{ContourObject, Detection, DetectionRecord, OdometrySample};

use super::path::PathTrack;
use super::scenario::{Scenario, ScenarioError, ScenarioObject};
use super::truth::{ground_truth, GroundTruth};
use crate::error::AppError;
use crate::records::{merge_streams, write_records, Event, StreamRecord, DETECTIONS_FILE, LIDAR_FILE, ODOMETRY_FILE};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

const LIDAR_STREAM: u64 = 1;
const CAMERA_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedStreams {
    pub odometry: Vec<OdometrySample>,
    pub detections: Vec<DetectionRecord>,
    pub lidar: Vec<(f64, Vec<ContourObject>)>,
    pub ground_truth: GroundTruth,
}

impl GeneratedStreams {
    /// All records merged in replay order.
    pub fn events(&self) -> Vec<Event> {
        merge_streams(vec![
            self.odometry.iter().copied().map(Event::Odometry).collect(),
            self.detections.iter().cloned().map(Event::Detections).collect(),
            self.lidar
                .iter()
                .map(|(t, objects)| Event::Lidar {
                    t: *t,
                    objects: objects.clone(),
                })
                .collect(),
        ])
    }

    /// Writes the three stream files and the ground truth into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), AppError> {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir.display().to_string(), e))?;
        let write = |name: &str, records: Vec<StreamRecord>| {
            let path = dir.join(name);
            let file = std::fs::File::create(&path).map_err(|e| AppError::io(path.display().to_string(), e))?;
            write_records(std::io::BufWriter::new(file), &records).map_err(|e| AppError::io(path.display().to_string(), e))
        };
        write(ODOMETRY_FILE, self.odometry.iter().map(StreamRecord::from_odometry).collect())?;
        write(DETECTIONS_FILE, self.detections.iter().map(StreamRecord::from_detections).collect())?;
        write(LIDAR_FILE, self.lidar.iter().map(|(t, o)| StreamRecord::from_lidar(*t, o)).collect())?;
        let path = dir.join(GROUND_TRUTH_FILE);
        let mut text = serde_json::to_string_pretty(&self.ground_truth).map_err(|e| AppError::Other(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| AppError::io(path.display().to_string(), e))
    }
}

fn ticks(duration: f64, hz: f64) -> Vec<f64> {
    let n = (duration * hz + 1e-9).floor() as u64;
    (0..=n).map(|k| k as f64 / hz).collect()
}

fn ccw(mut poly: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let pts: Vec<WorldPoint> = poly.iter().map(|&p| p.into()).collect();
    if signed_area(&pts) < 0.0 {
        poly.reverse();
    }
    poly
}

fn contains_origin(poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        (b[0] - a[0]) * (-a[1]) - (b[1] - a[1]) * (-a[0]) > 0.0
    })
}

fn centroid(poly: &[[f64; 2]]) -> [f64; 2] {
    let n = poly.len() as f64;
    let (sx, sy) = poly.iter().fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
    [sx / n, sy / n]
}

/// Footprint vertices the sensor at the robot origin sees (endpoints of edges
/// facing it), ordered by decreasing bearing, i.e. as a clockwise scan meets
/// them. Noise-free.
pub fn visible_contour(footprint_robot: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let poly = ccw(footprint_robot.to_vec());
    if contains_origin(&poly) {
        return Vec::new();
    }
    let n = poly.len();
    let mut visible = vec![false; n];
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let normal = [b[1] - a[1], a[0] - b[0]];
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        if normal[0] * mid[0] + normal[1] * mid[1] < 0.0 {
            visible[i] = true;
            visible[(i + 1) % n] = true;
        }
    }
    let c = centroid(&poly);
    let reference = c[1].atan2(c[0]);
    let mut pts: Vec<[f64; 2]> = poly.iter().zip(&visible).filter(|(_, &v)| v).map(|(p, _)| *p).collect();
    let rel = |p: &[f64; 2]| normalize_angle(p[1].atan2(p[0]) - reference);
    pts.sort_by(|a, b| rel(b).total_cmp(&rel(a)));
    pts
}

fn to_robot(pose: &Pose2D, footprint: &[[f64; 2]]) -> Vec<[f64; 2]> {
    footprint.iter().map(|&p| pose.inverse_transform_point(p)).collect()
}

fn lidar_contour(
    obj: &ScenarioObject,
    pose: &Pose2D,
    sc: &Scenario,
    noise: &Normal<f64>,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<[f64; 2]>> {
    let fp = to_robot(pose, &obj.footprint);
    let mut pts = visible_contour(&fp);
    if pts.is_empty() {
        return None;
    }
    let range = pts.iter().map(|p| p[0].hypot(p[1])).fold(f64::INFINITY, f64::min);
    if range > sc.lidar_range {
        return None;
    }
    if obj.support_offset > 0.0 {
        let c = centroid(&fp);
        for p in &mut pts {
            let d = [p[0] - c[0], p[1] - c[1]];
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                p[0] += obj.support_offset * d[0] / len;
                p[1] += obj.support_offset * d[1] / len;
            }
        }
    }
    for p in &mut pts {
        p[0] += noise.sample(rng);
        p[1] += noise.sample(rng);
    }
    Some(pts)
}

fn camera_detection(
    obj: &ScenarioObject,
    pose: &Pose2D,
    sc: &Scenario,
    noise: &Normal<f64>,
    rng: &mut ChaCha8Rng,
) -> Option<Detection> {
    let class = obj.class?;
    let fp: Vec<[f64; 2]> = to_robot(pose, &obj.footprint)
        .into_iter()
        .map(|p| [p[0] + noise.sample(rng), p[1] + noise.sample(rng)])
        .collect();
    let c = centroid(&fp);
    let range = c[0].hypot(c[1]);
    if range > sc.detector.max_range {
        return None;
    }
    let cal = &sc.calibration;
    let center_cam = cal.extrinsic.apply([c[0], c[1], obj.height() / 2.0]);
    if center_cam[2] <= MIN_PROJECTION_DEPTH
        || center_cam[0].atan2(center_cam[2]).abs() > sc.detector.fov_deg.to_radians() / 2.0
    {
        return None;
    }
    let k = &cal.intrinsics;
    let mut pixels = Vec::with_capacity(fp.len() * 2);
    for p in &fp {
        for z in [0.0, obj.height()] {
            let q = cal.extrinsic.apply([p[0], p[1], z]);
            if q[2] <= MIN_PROJECTION_DEPTH {
                return None;
            }
            pixels.push([k.fx * q[0] / q[2] + k.cx, k.fy * q[1] / q[2] + k.cy]);
        }
    }
    let bbox = PixelBox::enclosing(pixels)?.clamped(k.width_f(), k.height_f());
    if bbox.area() <= 0.0 {
        return None;
    }
    if rng.random::<f64>() >= sc.detector.probability(range) {
        return None;
    }
    let [lo, hi] = sc.detector.confidence.for_class(class);
    let confidence = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    Some(Detection { class, confidence, bbox })
}

/// Simulates the drive: odometry at every sensor tick, one LiDAR message per
/// LiDAR tick (object ids are 1-based scenario indices) and one camera
/// record per camera tick that saw anything.
pub fn generate_streams(sc: &Scenario) -> Result<GeneratedStreams, ScenarioError> {
    sc.validate()?;
    let track = PathTrack::new(&sc.path);
    let noise = Normal::new(0.0, sc.lidar_noise_sigma).map_err(|e| ScenarioError {
        field: "lidar_noise_sigma".into(),
        message: e.to_string(),
    })?;
    let mut lidar_rng = ChaCha8Rng::seed_from_u64(sc.seed);
    lidar_rng.set_stream(LIDAR_STREAM);
    let mut camera_rng = ChaCha8Rng::seed_from_u64(sc.seed);
    camera_rng.set_stream(CAMERA_STREAM);

    let lidar_ticks = ticks(track.duration(), sc.lidar_hz);
    let camera_ticks = ticks(track.duration(), sc.camera_hz);

    let mut odo_ticks: Vec<f64> = lidar_ticks.iter().chain(&camera_ticks).copied().collect();
    odo_ticks.sort_by(f64::total_cmp);
    odo_ticks.dedup();
    let odometry = odo_ticks
        .iter()
        .map(|&t| {
            let (pose, speed) = track.state(t);
            OdometrySample { timestamp: t, pose, speed }
        })
        .collect();

    let lidar = lidar_ticks
        .iter()
        .map(|&t| {
            let (pose, _) = track.state(t);
            let objects = sc
                .objects
                .iter()
                .enumerate()
                .filter_map(|(i, o)| {
                    lidar_contour(o, &pose, sc, &noise, &mut lidar_rng).map(|points| ContourObject {
                        object_id: i as u64 + 1,
                        points,
                        timestamp: t,
                    })
                })
                .collect();
            (t, objects)
        })
        .collect();

    let detections = camera_ticks
        .iter()
        .filter_map(|&t| {
            let (pose, _) = track.state(t);
            let detections: Vec<Detection> = sc
                .objects
                .iter()
                .filter_map(|o| camera_detection(o, &pose, sc, &noise, &mut camera_rng))
                .collect();
            (!detections.is_empty()).then_some(DetectionRecord { timestamp: t, detections })
        })
        .collect();

    Ok(GeneratedStreams {
        odometry,
        detections,
        lidar,
        ground_truth: ground_truth(sc, &track),
    })
}
