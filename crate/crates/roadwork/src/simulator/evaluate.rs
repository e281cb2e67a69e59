use serde::Serialize;
use thiserror::Error;

use super::truth::GroundTruth;
use crate::outputs::SiteDocument;

/// Largest centroid distance at which a record may answer a ground-truth site.
pub const PAIRING_GATE: f64 = 25.0;

#[derive(Debug, Error, PartialEq)]
pub enum EvaluateError {
    #[error("site {site_id} is in the {found:?} frame but ground truth is in {expected:?}")]
    FrameMismatch {
        site_id: u32,
        found: crate::outputs::FrameKind,
        expected: crate::outputs::FrameKind,
    },
    #[error("site {0} has an empty polygon")]
    EmptyPolygon(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerError {
    pub site: String,
    pub corner: &'static str,
    pub site_id: u32,
    /// Distance to the nearest raw-polygon vertex, meters.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub corners: Vec<CornerError>,
    /// Ground-truth sites without a record.
    pub missed: Vec<String>,
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub std_dev: Option<f64>,
}

fn mean_of(points: &[[f64; 2]]) -> [f64; 2] {
    let n = points.len() as f64;
    [points.iter().map(|p| p[0]).sum::<f64>() / n, points.iter().map(|p| p[1]).sum::<f64>() / n]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Mean and population standard deviation.
pub fn mean_and_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Pairs ground-truth sites with records by nearest centroid (greedy,
/// one-to-one, within [`PAIRING_GATE`]) and measures each corner against the
/// nearest raw-polygon vertex of its record.
pub fn evaluate(records: &[SiteDocument], gt: &GroundTruth) -> Result<Evaluation, EvaluateError> {
    for r in records {
        if r.frame != gt.frame {
            return Err(EvaluateError::FrameMismatch {
                site_id: r.site_id,
                found: r.frame,
                expected: gt.frame,
            });
        }
        if r.raw_polygon.is_empty() || r.hull_polygon.is_empty() {
            return Err(EvaluateError::EmptyPolygon(r.site_id));
        }
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (g, site) in gt.sites.iter().enumerate() {
        for (r, rec) in records.iter().enumerate() {
            let d = dist(site.centroid(), mean_of(&rec.hull_polygon));
            if d <= PAIRING_GATE {
                pairs.push((d, g, r));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut gt_match: Vec<Option<usize>> = vec![None; gt.sites.len()];
    let mut used = vec![false; records.len()];
    for (_, g, r) in pairs {
        if gt_match[g].is_none() && !used[r] {
            gt_match[g] = Some(r);
            used[r] = true;
        }
    }

    let mut corners = Vec::new();
    let mut missed = Vec::new();
    for (site, m) in gt.sites.iter().zip(&gt_match) {
        let Some(r) = *m else {
            missed.push(site.label.clone());
            continue;
        };
        let rec = &records[r];
        for (corner, p) in site.corners() {
            let error = rec.raw_polygon.iter().map(|&v| dist(p, v)).fold(f64::INFINITY, f64::min);
            corners.push(CornerError {
                site: site.label.clone(),
                corner,
                site_id: rec.site_id,
                error,
            });
        }
    }
    let errors: Vec<f64> = corners.iter().map(|c| c.error).collect();
    let stats = mean_and_sd(&errors);
    Ok(Evaluation {
        corners,
        missed,
        mean: stats.map(|s| s.0),
        std_dev: stats.map(|s| s.1),
    })
}

impl Evaluation {
    /// Per-corner table followed by the mean/SD line.
    pub fn to_table(&self) -> String {
        let mut s = String::from("site\tcorner\tsite_id\terror_m\n");
        for c in &self.corners {
            s.push_str(&format!("{}\t{}\t{}\t{:.3}\n", c.site, c.corner, c.site_id, c.error));
        }
        for m in &self.missed {
            s.push_str(&format!("{m}\tmissed\t-\t-\n"));
        }
        match (self.mean, self.std_dev) {
            (Some(m), Some(sd)) => s.push_str(&format!("mean {m:.3} m, sd {sd:.3} m over {} corners\n", self.corners.len())),
            _ => s.push_str("no corners evaluated\n"),
        }
        s
    }
}
