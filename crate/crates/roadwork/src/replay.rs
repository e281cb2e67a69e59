//! Drives the engine over merged input streams and writes the outputs.

use std::path::Path;
use std::time::Instant;

use roadwork_core::engine::{EngineError, RoadworkEngine};
use roadwork_core::{CycleOutput, EngineConfig, Summary};
use serde::Serialize;

use crate::detector::Detector;
use crate::error::{AppError, InputError};
use crate::outputs::{write_latency, write_site_record, write_summary, AnnotationWriter};
use crate::records::{merge_streams, read_stream, Event, DETECTIONS_FILE, LIDAR_FILE, ODOMETRY_FILE};

/// Per-cycle timing of the pipeline, excluding ingest and output.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct LatencyReport {
    pub cycles: usize,
    pub max_ms: f64,
    pub mean_ms: f64,
    pub max_objects_per_frame: usize,
    /// Largest number of objects held in active sites at once.
    pub max_dictionary_entries: usize,
    /// LiDAR timestamps skipped for lack of a pose within 100 ms.
    pub skipped_frames: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayStats {
    pub summary: Summary,
    pub latency: LatencyReport,
    pub site_count: usize,
}

/// Reads and merges the three stream files of `dir`. With `skip_detections`
/// the camera stream is not read (an external detector replaces it).
pub fn load_inputs(dir: &Path, skip_detections: bool) -> Result<Vec<Event>, InputError> {
    let mut streams = vec![read_stream(&dir.join(ODOMETRY_FILE))?, read_stream(&dir.join(LIDAR_FILE))?];
    if !skip_detections {
        streams.push(read_stream(&dir.join(DETECTIONS_FILE))?);
    }
    Ok(merge_streams(streams))
}

/// Feeds `events` through a fresh engine, handing every cycle's output to
/// `sink`. With a detector, each LiDAR cycle first requests the detections
/// of its timestamp and camera events in `events` are ignored.
pub fn run_replay<F>(
    config: &EngineConfig,
    events: &[Event],
    mut detector: Option<&mut dyn Detector>,
    mut sink: F,
) -> Result<ReplayStats, AppError>
where
    F: FnMut(&CycleOutput) -> Result<(), AppError>,
{
    let mut engine = RoadworkEngine::new(config.clone()).map_err(|e| AppError::Other(e.to_string()))?;
    let mut latency = LatencyReport::default();
    let mut total = 0.0;
    let mut site_count = 0;
    for event in events {
        match event {
            Event::Odometry(s) => engine
                .push_odometry(*s)
                .map_err(|e| AppError::Other(format!("odometry at t={}: {e}", s.timestamp)))?,
            Event::Detections(r) => {
                if detector.is_none() {
                    engine.push_detections(r.clone());
                }
            }
            Event::Lidar { t, objects } => {
                if let Some(d) = detector.as_deref_mut() {
                    if let Some(record) = d.detect(*t)? {
                        engine.push_detections(record);
                    }
                }
                let start = Instant::now();
                let result = engine.process_lidar(*t, objects);
                let ms = start.elapsed().as_secs_f64() * 1e3;
                let out = match result {
                    Ok(out) => out,
                    Err(EngineError::Odometry(_)) => {
                        latency.skipped_frames.push(*t);
                        continue;
                    }
                    Err(e) => return Err(AppError::Other(format!("cycle at t={t}: {e}"))),
                };
                latency.cycles += 1;
                total += ms;
                latency.max_ms = latency.max_ms.max(ms);
                latency.max_objects_per_frame = latency.max_objects_per_frame.max(objects.len());
                latency.max_dictionary_entries = latency.max_dictionary_entries.max(engine.sites().member_count());
                site_count += out.finished.len();
                sink(&out)?;
            }
        }
    }
    if latency.cycles > 0 {
        latency.mean_ms = total / latency.cycles as f64;
    }
    Ok(ReplayStats {
        summary: engine.summary(),
        latency,
        site_count,
    })
}

/// Runs a replay and writes annotations, site documents and the summary to
/// `out_dir` (plus `latency.json` when asked).
pub fn replay_to_dir(
    config: &EngineConfig,
    events: &[Event],
    detector: Option<&mut dyn Detector>,
    out_dir: &Path,
    latency_report: bool,
) -> Result<ReplayStats, AppError> {
    std::fs::create_dir_all(out_dir).map_err(|e| AppError::io(out_dir.display().to_string(), e))?;
    let mut annotations = AnnotationWriter::create(out_dir)?;
    let stats = run_replay(config, events, detector, |out| {
        annotations.write(&out.annotation)?;
        for record in &out.finished {
            write_site_record(out_dir, record)?;
        }
        Ok(())
    })?;
    annotations.finish()?;
    write_summary(out_dir, &stats.summary)?;
    if latency_report {
        write_latency(out_dir, &stats.latency)?;
    }
    Ok(stats)
}
