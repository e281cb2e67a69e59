//! Line-delimited stream records: one JSON object per line, tagged by
//! `"type"`.
//!
//! ```text
//! {"type":"odometry","t":0.1,"x":1.39,"y":0.0,"heading":0.0,"speed":13.89}
//! {"type":"detections","t":0.1,"detections":[{"class":"barrier","confidence":0.91,"box":[300.0,150.0,340.0,190.0]}]}
//! {"type":"lidar_objects","t":0.1,"objects":[{"id":3,"points":[[20.0,3.3],[20.0,3.0]]}]}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use roadwork_core::geometry::{PixelBox, Pose2D};
use roadwork_core::{ContourObject, Detection, DetectionRecord, ObjectClass, OdometrySample};
use serde::{Deserialize, Serialize};

use crate::error::InputError;

pub const DETECTIONS_FILE: &str = "detections.jsonl";
pub const LIDAR_FILE: &str = "lidar_objects.jsonl";
pub const ODOMETRY_FILE: &str = "odometry.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionEntry {
    pub class: ObjectClass,
    pub confidence: f64,
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LidarObjectEntry {
    pub id: u64,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StreamRecord {
    Odometry {
        t: f64,
        x: f64,
        y: f64,
        heading: f64,
        speed: f64,
    },
    Detections {
        t: f64,
        detections: Vec<DetectionEntry>,
    },
    LidarObjects {
        t: f64,
        objects: Vec<LidarObjectEntry>,
    },
}

impl StreamRecord {
    pub fn timestamp(&self) -> f64 {
        match self {
            StreamRecord::Odometry { t, .. } | StreamRecord::Detections { t, .. } | StreamRecord::LidarObjects { t, .. } => *t,
        }
    }

    pub fn from_odometry(s: &OdometrySample) -> Self {
        StreamRecord::Odometry {
            t: s.timestamp,
            x: s.pose.x,
            y: s.pose.y,
            heading: s.pose.heading,
            speed: s.speed,
        }
    }

    pub fn from_detections(r: &DetectionRecord) -> Self {
        StreamRecord::Detections {
            t: r.timestamp,
            detections: r
                .detections
                .iter()
                .map(|d| DetectionEntry {
                    class: d.class,
                    confidence: d.confidence,
                    bbox: [d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max],
                })
                .collect(),
        }
    }

    pub fn from_lidar(t: f64, objects: &[ContourObject]) -> Self {
        StreamRecord::LidarObjects {
            t,
            objects: objects
                .iter()
                .map(|o| LidarObjectEntry {
                    id: o.object_id,
                    points: o.points.clone(),
                })
                .collect(),
        }
    }
}

/// A validated record ready for the engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Odometry(OdometrySample),
    Detections(DetectionRecord),
    Lidar { t: f64, objects: Vec<ContourObject> },
}

impl Event {
    pub fn timestamp(&self) -> f64 {
        match self {
            Event::Odometry(s) => s.timestamp,
            Event::Detections(r) => r.timestamp,
            Event::Lidar { t, .. } => *t,
        }
    }
}

impl TryFrom<StreamRecord> for Event {
    type Error = String;

    fn try_from(r: StreamRecord) -> Result<Self, String> {
        let t = r.timestamp();
        if !t.is_finite() {
            return Err("timestamp is not finite".into());
        }
        match r {
            StreamRecord::Odometry { t, x, y, heading, speed } => {
                if ![x, y, heading, speed].iter().all(|v| v.is_finite()) || speed < 0.0 {
                    return Err("odometry fields must be finite with speed >= 0".into());
                }
                Ok(Event::Odometry(OdometrySample {
                    timestamp: t,
                    pose: Pose2D::new(x, y, heading),
                    speed,
                }))
            }
            StreamRecord::Detections { t, detections } => {
                let detections = detections
                    .into_iter()
                    .map(|d| {
                        if !(0.0..=1.0).contains(&d.confidence) {
                            return Err(format!("confidence {} outside [0, 1]", d.confidence));
                        }
                        let [x0, y0, x1, y1] = d.bbox;
                        let bbox = PixelBox::new(x0, y0, x1, y1).map_err(|e| format!("box {:?}: {e}", d.bbox))?;
                        Ok(Detection {
                            class: d.class,
                            confidence: d.confidence,
                            bbox,
                        })
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                Ok(Event::Detections(DetectionRecord { timestamp: t, detections }))
            }
            StreamRecord::LidarObjects { t, objects } => {
                let mut ids = std::collections::BTreeSet::new();
                let objects = objects
                    .into_iter()
                    .map(|o| {
                        if !ids.insert(o.id) {
                            return Err(format!("duplicate object id {}", o.id));
                        }
                        if o.points.iter().flatten().any(|v| !v.is_finite()) {
                            return Err(format!("object {} has non-finite points", o.id));
                        }
                        Ok(ContourObject {
                            object_id: o.id,
                            points: o.points,
                            timestamp: t,
                        })
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                Ok(Event::Lidar { t, objects })
            }
        }
    }
}

/// Reads one stream file. Every line must parse, carry a finite timestamp
/// and not go back in time. Blank lines are skipped. A missing file reads
/// as an empty stream.
pub fn read_stream(path: &Path) -> Result<Vec<Event>, InputError> {
    let err = |line: usize, message: String| InputError {
        path: path.to_path_buf(),
        line,
        message,
    };
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(err(0, e.to_string())),
    };
    let mut events = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| err(n, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: StreamRecord = serde_json::from_str(&line).map_err(|e| err(n, e.to_string()))?;
        let event = Event::try_from(record).map_err(|m| err(n, m))?;
        let t = event.timestamp();
        if t < last {
            return Err(err(n, format!("timestamp {t} precedes {last}")));
        }
        last = t;
        events.push(event);
    }
    Ok(events)
}

/// Merges time-sorted streams into one sequence ordered by timestamp. At
/// equal times odometry comes first, then camera, then LiDAR, so a cycle
/// sees the pose and detections of its own instant.
pub fn merge_streams(streams: Vec<Vec<Event>>) -> Vec<Event> {
    let mut all: Vec<Event> = streams.into_iter().flatten().collect();
    let priority = |e: &Event| match e {
        Event::Odometry(_) => 0u8,
        Event::Detections(_) => 1,
        Event::Lidar { .. } => 2,
    };
    all.sort_by(|a, b| a.timestamp().total_cmp(&b.timestamp()).then(priority(a).cmp(&priority(b))));
    all
}

pub fn write_records<W: Write>(mut out: W, records: &[StreamRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_round_trip() {
        let line = r#"{"type":"detections","t":1.5,"detections":[{"class":"panel_pass_left","confidence":0.8,"box":[1.0,2.0,3.0,4.0]}]}"#;
        let r: StreamRecord = serde_json::from_str(line).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), line);
        let Event::Detections(d) = Event::try_from(r).unwrap() else { panic!() };
        assert_eq!(d.detections[0].class, ObjectClass::PanelPassLeft);
    }

    #[test]
    fn unknown_fields_and_bad_boxes_are_rejected() {
        assert!(serde_json::from_str::<StreamRecord>(r#"{"type":"odometry","t":0,"x":0,"y":0,"heading":0,"speed":1,"z":2}"#).is_err());
        let r: StreamRecord =
            serde_json::from_str(r#"{"type":"detections","t":0,"detections":[{"class":"barrier","confidence":0.9,"box":[5,0,1,1]}]}"#)
                .unwrap();
        assert!(Event::try_from(r).is_err());
    }

    #[test]
    fn merge_orders_equal_times_by_kind() {
        let odo = Event::Odometry(OdometrySample {
            timestamp: 1.0,
            pose: Pose2D::identity(),
            speed: 0.0,
        });
        let lidar = Event::Lidar { t: 1.0, objects: vec![] };
        let cam = Event::Detections(DetectionRecord {
            timestamp: 1.0,
            detections: vec![],
        });
        let merged = merge_streams(vec![vec![lidar.clone()], vec![cam.clone()], vec![odo.clone()]]);
        assert_eq!(merged, vec![odo, cam, lidar]);
    }
}
