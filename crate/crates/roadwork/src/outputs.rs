//! Output files of a session.
//!
//! ```text
//! out/annotations.jsonl      one FrameAnnotation per LiDAR cycle
//! out/sites/site_0001.json   one document per finished site
//! out/summary.json
//! out/summary.txt
//! out/latency.json           only with --latency-report
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use roadwork_core::sites::{ClassCounts, OutputFrame};
use roadwork_core::{FrameAnnotation, SiteId, SiteRecord, Summary};
use serde::{Deserialize, Serialize};

use crate::error::AppError;

pub const ANNOTATIONS_FILE: &str = "annotations.jsonl";
pub const SITES_DIR: &str = "sites";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const LATENCY_FILE: &str = "latency.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Utm,
    /// No anchor configured: local world coordinates of the session.
    Local,
}

/// Serialized form of a finished site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteDocument {
    pub site_id: SiteId,
    pub frame: FrameKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone: Option<String>,
    pub raw_polygon: Vec<[f64; 2]>,
    pub hull_polygon: Vec<[f64; 2]>,
    pub length: f64,
    pub depth: f64,
    pub class_counts: ClassCounts,
    pub start_time: f64,
    pub end_time: f64,
}

impl From<&SiteRecord> for SiteDocument {
    fn from(r: &SiteRecord) -> Self {
        let (frame, zone) = match &r.frame {
            OutputFrame::Utm { zone } => (FrameKind::Utm, Some(zone.clone())),
            OutputFrame::Local => (FrameKind::Local, None),
        };
        SiteDocument {
            site_id: r.site_id,
            frame,
            zone,
            raw_polygon: r.raw_polygon.clone(),
            hull_polygon: r.hull_polygon.clone(),
            length: r.dimensions.length,
            depth: r.dimensions.depth,
            class_counts: r.class_counts,
            start_time: r.start_time,
            end_time: r.end_time,
        }
    }
}

pub fn site_file_name(id: SiteId) -> String {
    format!("site_{id:04}.json")
}

/// Appends frame annotations to `annotations.jsonl`, one line each.
pub struct AnnotationWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl AnnotationWriter {
    pub fn create(out_dir: &Path) -> Result<Self, AppError> {
        let path = out_dir.join(ANNOTATIONS_FILE);
        let file = File::create(&path).map_err(|e| AppError::io(path.display().to_string(), e))?;
        Ok(Self {
            out: BufWriter::new(file),
            path,
        })
    }

    pub fn write(&mut self, a: &FrameAnnotation) -> Result<(), AppError> {
        let io = |e| AppError::io(self.path.display().to_string(), e);
        serde_json::to_writer(&mut self.out, a).map_err(|e| io(e.into()))?;
        self.out.write_all(b"\n").map_err(io)
    }

    pub fn finish(mut self) -> Result<(), AppError> {
        self.out.flush().map_err(|e| AppError::io(self.path.display().to_string(), e))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::Other(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| AppError::io(path.display().to_string(), e))
}

pub fn write_site_record(out_dir: &Path, record: &SiteRecord) -> Result<PathBuf, AppError> {
    let dir = out_dir.join(SITES_DIR);
    fs::create_dir_all(&dir).map_err(|e| AppError::io(dir.display().to_string(), e))?;
    let path = dir.join(site_file_name(record.site_id));
    write_json(&path, &SiteDocument::from(record))?;
    Ok(path)
}

pub fn write_summary(out_dir: &Path, summary: &Summary) -> Result<(), AppError> {
    write_json(&out_dir.join(SUMMARY_JSON), summary)?;
    let path = out_dir.join(SUMMARY_TXT);
    fs::write(&path, format!("{}\n", summary.to_text())).map_err(|e| AppError::io(path.display().to_string(), e))
}

pub fn write_latency(out_dir: &Path, report: &impl Serialize) -> Result<(), AppError> {
    write_json(&out_dir.join(LATENCY_FILE), report)
}

pub fn read_site_documents(dir: &Path) -> Result<Vec<SiteDocument>, AppError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| AppError::io(dir.display().to_string(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| AppError::io(p.display().to_string(), e))?;
            serde_json::from_str(&text).map_err(|e| {
                AppError::Input(crate::error::InputError {
                    path: p.clone(),
                    line: e.line(),
                    message: e.to_string(),
                })
            })
        })
        .collect()
}
