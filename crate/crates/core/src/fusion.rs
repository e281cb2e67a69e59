//! Per-frame association of gated detections with LiDAR contour boxes.
//!
//! A contour box is a candidate for a detection when their IoU is strictly
//! above the threshold and, for cones and vertical panels, the box area does
//! not exceed `size_ratio_limit` times the detection area. Barriers are exempt
//! from the size filter because chained barrier elements form one long
//! contour. Among candidates the box whose projected bottom line sits closest
//! to the detection's bottom edge wins; highest IoU is only a tie-breaker.
//! Detections are served greedily in descending confidence and every box is
//! used at most once.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::detection::{Detection, ObjectClass};
use crate::geometry::iou;
use crate::lidar::ContourBoxImage;
use crate::math;
use crate::ObjectId;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct MatchParams {
    pub iou_threshold: f64,
    /// Maximum contour-box to detection pixel-area ratio (non-barriers).
    pub size_ratio_limit: f64,
    /// Meters; contour objects beyond this range are not tracked.
    pub tracking_range: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            iou_threshold: 0.50,
            size_ratio_limit: 2.0,
            tracking_range: 50.0,
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold < 1.0) {
            return Err("iou_threshold");
        }
        if !(self.size_ratio_limit > 0.0 && self.size_ratio_limit.is_finite()) {
            return Err("size_ratio_limit");
        }
        if !(self.tracking_range > 0.0 && self.tracking_range.is_finite()) {
            return Err("tracking_range");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub detection_index: usize,
    pub object_id: ObjectId,
    pub iou: f64,
    pub class: ObjectClass,
    /// Pixels between the mean bottom-line row and the detection's bottom edge.
    pub bottom_gap: f64,
}

/// Distance in pixel rows between a contour box's bottom line and the
/// detection box's bottom edge.
pub fn bottom_gap(det: &Detection, cb: &ContourBoxImage) -> f64 {
    math::abs(cb.bottom_line_y() - det.bbox.y_max)
}

/// Whether `cb` may be matched to `det` at all, and with which IoU.
pub fn candidate_iou(det: &Detection, cb: &ContourBoxImage, p: &MatchParams) -> Option<f64> {
    if cb.range > p.tracking_range {
        return None;
    }
    let v = iou(&det.bbox, &cb.bbox);
    if v <= p.iou_threshold {
        return None;
    }
    if !det.class.is_barrier() && cb.bbox.area() > p.size_ratio_limit * det.bbox.area() {
        return None;
    }
    Some(v)
}

/// Order in which detections are served: higher confidence first, then
/// lower index.
pub fn detection_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.total_cmp(&dets[a].confidence).then(a.cmp(&b)));
    order
}

/// Preference between two candidates of the same detection: smaller bottom
/// gap, then higher IoU, then lower object id. `Less` means `a` is preferred.
pub fn compare_candidates(a: (f64, f64, ObjectId), b: (f64, f64, ObjectId)) -> Ordering {
    let (gap_a, iou_a, id_a) = a;
    let (gap_b, iou_b, id_b) = b;
    gap_a
        .total_cmp(&gap_b)
        .then(iou_b.total_cmp(&iou_a))
        .then(id_a.cmp(&id_b))
}

/// Greedy one-to-one association of one frame. Matches are returned in the
/// order they were assigned.
pub fn match_frame(dets: &[Detection], boxes: &[ContourBoxImage], p: &MatchParams) -> Vec<Match> {
    let mut used = alloc::vec![false; boxes.len()];
    let mut matches = Vec::new();
    for di in detection_order(dets) {
        let det = &dets[di];
        let mut best: Option<(usize, f64, f64)> = None;
        for (bi, cb) in boxes.iter().enumerate() {
            if used[bi] {
                continue;
            }
            let Some(v) = candidate_iou(det, cb, p) else {
                continue;
            };
            let gap = bottom_gap(det, cb);
            let better = match best {
                None => true,
                Some((b, bv, bgap)) => {
                    compare_candidates((gap, v, cb.object_id), (bgap, bv, boxes[b].object_id)) == Ordering::Less
                }
            };
            if better {
                best = Some((bi, v, gap));
            }
        }
        if let Some((bi, v, gap)) = best {
            used[bi] = true;
            matches.push(Match {
                detection_index: di,
                object_id: boxes[bi].object_id,
                iou: v,
                class: det.class,
                bottom_gap: gap,
            });
        }
    }
    matches
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PixelBox;
    use alloc::vec;

    fn det(class: ObjectClass, conf: f64, b: [f64; 4]) -> Detection {
        Detection {
            class,
            confidence: conf,
            bbox: PixelBox::new(b[0], b[1], b[2], b[3]).unwrap(),
        }
    }

    fn cbox(id: ObjectId, b: [f64; 4], bottom_y: f64) -> ContourBoxImage {
        ContourBoxImage {
            object_id: id,
            bbox: PixelBox::new(b[0], b[1], b[2], b[3]).unwrap(),
            bottom_line: vec![[b[0], bottom_y], [b[2], bottom_y]],
            range: 10.0,
            clipped: false,
        }
    }

    #[test]
    fn single_overlapping_pair_matches() {
        let d = [det(ObjectClass::PanelPassLeft, 0.9, [0.0, 0.0, 10.0, 10.0])];
        // iou 0.8
        let b = [cbox(3, [0.0, 0.0, 10.0, 8.0], 8.0)];
        let m = match_frame(&d, &b, &MatchParams::default());
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].object_id, 3);
        assert!((m[0].iou - 0.8).abs() < 1e-12);
    }

    // IoU never exceeds the smaller/larger area ratio, so a box more than twice
    // the detection area cannot pass a 0.5 IoU gate. The size rule and the
    // barrier exemption are exercised with a lowered IoU threshold.
    fn permissive() -> MatchParams {
        MatchParams {
            iou_threshold: 0.15,
            ..MatchParams::default()
        }
    }

    #[test]
    fn size_filter_excludes_oversized_panel_box() {
        // detection area 1000; candidate boxes of area 1800 and 2500 containing it
        let d = [det(ObjectClass::PanelPassLeft, 0.9, [0.0, 0.0, 20.0, 50.0])];
        let b = [cbox(1, [0.0, 0.0, 20.0, 90.0], 90.0), cbox(2, [0.0, 0.0, 25.0, 100.0], 50.0)];
        assert!(iou(&d[0].bbox, &b[0].bbox) > 0.5);
        assert!(iou(&d[0].bbox, &b[1].bbox) > permissive().iou_threshold);
        // box 2 would win on bottom gap without the size rule
        let m = match_frame(&d, &b, &permissive());
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].object_id, 1);
    }

    #[test]
    fn oversized_box_is_never_a_candidate_at_default_threshold() {
        let d = det(ObjectClass::Barrier, 0.9, [0.0, 0.0, 20.0, 50.0]);
        let b = cbox(2, [0.0, 0.0, 25.0, 100.0], 50.0);
        assert!(candidate_iou(&d, &b, &MatchParams::default()).is_none());
    }

    #[test]
    fn bottom_edge_beats_higher_iou() {
        let d = [det(ObjectClass::PanelPassRight, 0.9, [0.0, 0.0, 100.0, 100.0])];
        // iou 0.6 with gap 30, iou 0.55 with gap 4
        let b = [cbox(1, [0.0, 0.0, 100.0, 60.0], 70.0), cbox(2, [0.0, 0.0, 100.0, 55.0], 96.0)];
        assert!((iou(&d[0].bbox, &b[0].bbox) - 0.6).abs() < 1e-12);
        assert!((iou(&d[0].bbox, &b[1].bbox) - 0.55).abs() < 1e-12);
        let m = match_frame(&d, &b, &MatchParams::default());
        assert_eq!(m[0].object_id, 2);
        assert!((m[0].bottom_gap - 4.0).abs() < 1e-12);
    }

    #[test]
    fn barrier_is_exempt_from_size_filter() {
        // contour box five times the detection area
        let d = [det(ObjectClass::Barrier, 0.9, [0.0, 0.0, 100.0, 10.0])];
        let b = [cbox(4, [0.0, 0.0, 500.0, 10.0], 10.0)];
        assert!((b[0].bbox.area() / d[0].bbox.area() - 5.0).abs() < 1e-12);
        assert_eq!(match_frame(&d, &b, &permissive()).len(), 1);
        let panel = [det(ObjectClass::PanelPassLeft, 0.9, [0.0, 0.0, 100.0, 10.0])];
        assert!(match_frame(&panel, &b, &permissive()).is_empty());
    }

    #[test]
    fn iou_at_threshold_is_not_a_match() {
        let d = [det(ObjectClass::Barrier, 0.9, [0.0, 0.0, 10.0, 10.0])];
        let b = [cbox(1, [0.0, 0.0, 10.0, 5.0], 5.0)];
        assert!(match_frame(&d, &b, &MatchParams::default()).is_empty());
    }

    #[test]
    fn boxes_beyond_tracking_range_are_ignored() {
        let d = [det(ObjectClass::Barrier, 0.9, [0.0, 0.0, 10.0, 10.0])];
        let mut b = cbox(1, [0.0, 0.0, 10.0, 10.0], 10.0);
        b.range = 50.5;
        assert!(match_frame(&d, &[b], &MatchParams::default()).is_empty());
    }

    #[test]
    fn higher_confidence_detection_claims_shared_box() {
        let d = [
            det(ObjectClass::PanelPassLeft, 0.72, [0.0, 0.0, 10.0, 10.0]),
            det(ObjectClass::PanelPassLeft, 0.95, [0.0, 0.0, 10.0, 10.0]),
        ];
        let b = [cbox(9, [0.0, 0.0, 10.0, 10.0], 10.0)];
        let m = match_frame(&d, &b, &MatchParams::default());
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].detection_index, 1);
    }
}
