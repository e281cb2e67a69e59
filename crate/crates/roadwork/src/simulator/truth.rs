use std::collections::BTreeMap;

use roadwork_core::geometry::{point_to_axis_distance, WorldPoint};
use serde::{Deserialize, Serialize};

use super::path::PathTrack;
use super::scenario::Scenario;
use crate::outputs::FrameKind;

/// Reference corners of one labelled site, in the same frame as site records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthSite {
    pub label: String,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub deepest: [f64; 2],
}

impl GroundTruthSite {
    pub fn corners(&self) -> [(&'static str, [f64; 2]); 3] {
        [("start", self.start), ("end", self.end), ("deepest", self.deepest)]
    }

    pub fn centroid(&self) -> [f64; 2] {
        let c = self.corners();
        [
            c.iter().map(|(_, p)| p[0]).sum::<f64>() / 3.0,
            c.iter().map(|(_, p)| p[1]).sum::<f64>() / 3.0,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub frame: FrameKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone: Option<String>,
    pub sites: Vec<GroundTruthSite>,
}

const TIE: f64 = 1e-9;

/// Corners of every labelled site from the true footprints, measured along
/// the drive path: start is the vertex reached first (nearest the path on
/// ties), end the vertex reached last (nearest the path on ties), deepest the
/// vertex farthest from the start-end axis (reached first on ties).
pub fn ground_truth(sc: &Scenario, track: &PathTrack) -> GroundTruth {
    let mut groups: BTreeMap<&str, Vec<[f64; 2]>> = BTreeMap::new();
    for o in &sc.objects {
        if let Some(label) = &o.site {
            groups.entry(label).or_default().extend(o.footprint.iter().copied());
        }
    }
    let (origin, _) = track.state(0.0);
    let to_output = |p: [f64; 2]| {
        let local = WorldPoint::from(origin.inverse_transform_point(p));
        match &sc.utm_anchor {
            Some(a) => a.to_utm(&local),
            None => local.xy(),
        }
    };

    let mut sites: Vec<(f64, GroundTruthSite)> = groups
        .into_iter()
        .map(|(label, vertices)| {
            let proj: Vec<(f64, f64, [f64; 2])> = vertices
                .iter()
                .map(|&p| {
                    let (s, lat) = track.project(p);
                    (s, lat.abs(), p)
                })
                .collect();
            let start = proj
                .iter()
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
                .unwrap();
            let end = proj
                .iter()
                .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)))
                .unwrap();
            let (a, b) = (WorldPoint::from(start.2), WorldPoint::from(end.2));
            let depth = |p: [f64; 2]| point_to_axis_distance(&WorldPoint::from(p), &a, &b).unwrap_or(0.0);
            let max_depth = proj.iter().map(|q| depth(q.2)).fold(0.0, f64::max);
            let deepest = proj
                .iter()
                .filter(|q| depth(q.2) >= max_depth - TIE)
                .min_by(|x, y| x.0.total_cmp(&y.0))
                .unwrap();
            (
                start.0,
                GroundTruthSite {
                    label: label.to_string(),
                    start: to_output(start.2),
                    end: to_output(end.2),
                    deepest: to_output(deepest.2),
                },
            )
        })
        .collect();
    sites.sort_by(|a, b| a.0.total_cmp(&b.0));
    GroundTruth {
        frame: if sc.utm_anchor.is_some() { FrameKind::Utm } else { FrameKind::Local },
        zone: sc.utm_anchor.as_ref().map(|a| a.zone.clone()),
        sites: sites.into_iter().map(|(_, s)| s).collect(),
    }
}
