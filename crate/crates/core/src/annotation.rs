//! Per-frame annotations and the textual session summary.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::detection::ObjectClass;
use crate::geometry::PixelBox;
use crate::math;
use crate::sites::SiteDimensions;
use crate::{ObjectId, SiteId};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AnnotationEntry {
    pub object_id: ObjectId,
    pub class: ObjectClass,
    /// Contour box in the image; absent for ghosts.
    #[cfg_attr(feature = "serde", serde(rename = "box"))]
    pub bbox: Option<[f64; 4]>,
    pub site_id: Option<SiteId>,
    pub ghost: bool,
    /// IoU of this frame's detection match, if any.
    pub iou: Option<f64>,
}

impl AnnotationEntry {
    pub fn boxed(
        object_id: ObjectId,
        class: ObjectClass,
        bbox: &PixelBox,
        site_id: Option<SiteId>,
        iou: Option<f64>,
    ) -> Self {
        Self {
            object_id,
            class,
            bbox: Some([bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max]),
            site_id,
            ghost: false,
            iou,
        }
    }

    pub fn ghost(object_id: ObjectId, class: ObjectClass, site_id: SiteId) -> Self {
        Self {
            object_id,
            class,
            bbox: None,
            site_id: Some(site_id),
            ghost: true,
            iou: None,
        }
    }
}

/// What one LiDAR cycle shows: matched objects, visible site members and
/// ghosts.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FrameAnnotation {
    pub t: f64,
    pub speed: f64,
    pub detection_threshold: u32,
    pub objects: Vec<AnnotationEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SiteSize {
    pub site_id: SiteId,
    pub length: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Summary {
    pub roadworks_present: bool,
    pub count: usize,
    pub sites: Vec<SiteSize>,
}

/// Rounds to one decimal, halves away from zero.
pub fn round_tenth(v: f64) -> f64 {
    math::round(v * 10.0) / 10.0
}

/// Builds the summary from every site of the session, finished or active,
/// in the order given.
pub fn summarize<I>(sites: I) -> Summary
where
    I: IntoIterator<Item = (SiteId, SiteDimensions)>,
{
    let sites: Vec<SiteSize> = sites
        .into_iter()
        .map(|(site_id, d)| SiteSize {
            site_id,
            length: round_tenth(d.length),
            depth: round_tenth(d.depth),
        })
        .collect();
    Summary {
        roadworks_present: !sites.is_empty(),
        count: sites.len(),
        sites,
    }
}

impl Summary {
    /// `"2 roadworks; 20.0 m × 3.1 m; 7.4 m × 0.4 m"` or `"no roadworks"`.
    pub fn to_text(&self) -> String {
        if self.sites.is_empty() {
            return String::from("no roadworks");
        }
        let noun = if self.count == 1 { "roadwork" } else { "roadworks" };
        let mut s = format!("{} {}", self.count, noun);
        for site in &self.sites {
            s.push_str(&format!("; {:.1} m × {:.1} m", site.length, site.depth));
        }
        s
    }
}
