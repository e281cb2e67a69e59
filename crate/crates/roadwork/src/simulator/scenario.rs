use roadwork_core::{ObjectClass, SensorModelParams, UtmAnchor};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("invalid scenario field `{field}`: {message}")]
pub struct ScenarioError {
    pub field: String,
    pub message: String,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathVertex {
    pub x: f64,
    pub y: f64,
    /// Speed held on the segment starting here, m/s.
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioObject {
    /// `None` for clutter: seen by the LiDAR, never by the detector.
    #[serde(default)]
    pub class: Option<ObjectClass>,
    /// World-frame footprint polygon, either orientation.
    pub footprint: Vec<[f64; 2]>,
    /// Defaults per class.
    #[serde(default)]
    pub height: Option<f64>,
    /// Direction the object faces, radians. Informational only.
    #[serde(default)]
    pub facing: Option<f64>,
    /// Outward widening of the LiDAR contour, meters (support bases).
    #[serde(default)]
    pub support_offset: f64,
    /// Ground-truth site label.
    #[serde(default)]
    pub site: Option<String>,
}

impl ScenarioObject {
    /// Axis-aligned rectangular footprint.
    pub fn rect(class: Option<ObjectClass>, x0: f64, y0: f64, x1: f64, y1: f64, site: Option<&str>) -> Self {
        Self {
            class,
            footprint: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
            height: None,
            facing: None,
            support_offset: 0.0,
            site: site.map(str::to_string),
        }
    }

    pub fn height(&self) -> f64 {
        self.height.unwrap_or(match self.class {
            Some(ObjectClass::Barrier) => 1.0,
            Some(ObjectClass::TrafficCone) => 1.0,
            Some(ObjectClass::PanelPassLeft | ObjectClass::PanelPassRight) => 1.3,
            None => 1.5,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfidenceRanges {
    pub barrier: [f64; 2],
    pub traffic_cone: [f64; 2],
    pub panel: [f64; 2],
}

impl Default for ConfidenceRanges {
    fn default() -> Self {
        Self {
            barrier: [0.78, 0.97],
            traffic_cone: [0.72, 0.95],
            panel: [0.72, 0.96],
        }
    }
}

impl ConfidenceRanges {
    pub fn for_class(&self, class: ObjectClass) -> [f64; 2] {
        match class {
            ObjectClass::Barrier => self.barrier,
            ObjectClass::TrafficCone => self.traffic_cone,
            ObjectClass::PanelPassLeft | ObjectClass::PanelPassRight => self.panel,
        }
    }
}

/// Detection probability is `near_probability` up to `full_range`, falls
/// linearly to `far_probability` at `max_range` and is zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorModel {
    pub near_probability: f64,
    pub far_probability: f64,
    pub full_range: f64,
    pub max_range: f64,
    /// Horizontal field of view, degrees.
    pub fov_deg: f64,
    pub confidence: ConfidenceRanges,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            near_probability: 1.0,
            far_probability: 0.6,
            full_range: 30.0,
            max_range: 50.0,
            fov_deg: 77.0,
            confidence: ConfidenceRanges::default(),
        }
    }
}

impl DetectorModel {
    /// Always detects within range and field of view, with high confidence.
    pub fn perfect() -> Self {
        Self {
            far_probability: 1.0,
            ..Self::default()
        }
    }

    pub fn probability(&self, range: f64) -> f64 {
        if range <= self.full_range {
            self.near_probability
        } else if range <= self.max_range {
            let f = (range - self.full_range) / (self.max_range - self.full_range);
            self.near_probability + f * (self.far_probability - self.near_probability)
        } else {
            0.0
        }
    }
}

fn default_sigma() -> f64 {
    0.10
}

fn default_hz() -> f64 {
    10.0
}

fn default_lidar_range() -> f64 {
    80.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    /// Standard deviation of LiDAR contour and footprint noise, meters.
    #[serde(default = "default_sigma")]
    pub lidar_noise_sigma: f64,
    #[serde(default = "default_hz")]
    pub lidar_hz: f64,
    #[serde(default = "default_hz")]
    pub camera_hz: f64,
    #[serde(default = "default_lidar_range")]
    pub lidar_range: f64,
    pub path: Vec<PathVertex>,
    #[serde(default)]
    pub objects: Vec<ScenarioObject>,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default)]
    pub calibration: SensorModelParams,
    #[serde(default)]
    pub utm_anchor: Option<UtmAnchor>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.path.len() < 2 {
            return Err(invalid("path", "needs at least two vertices"));
        }
        for (i, v) in self.path.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite()) {
                return Err(invalid(format!("path[{i}]"), "non-finite position"));
            }
            if i + 1 < self.path.len() && !(v.speed > 0.0 && v.speed.is_finite()) {
                return Err(invalid(format!("path[{i}].speed"), "must be positive"));
            }
        }
        for (i, w) in self.path.windows(2).enumerate() {
            if (w[1].x - w[0].x).hypot(w[1].y - w[0].y) < 1e-9 {
                return Err(invalid(format!("path[{}]", i + 1), "repeats the previous vertex"));
            }
        }
        if !(self.lidar_noise_sigma >= 0.0 && self.lidar_noise_sigma.is_finite()) {
            return Err(invalid("lidar_noise_sigma", "must be >= 0"));
        }
        for (name, v) in [("lidar_hz", self.lidar_hz), ("camera_hz", self.camera_hz), ("lidar_range", self.lidar_range)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive"));
            }
        }
        let d = &self.detector;
        for (name, p) in [("detector.near_probability", d.near_probability), ("detector.far_probability", d.far_probability)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(name, "must lie in [0, 1]"));
            }
        }
        if !(d.full_range >= 0.0 && d.max_range > d.full_range) {
            return Err(invalid("detector.max_range", "must exceed full_range"));
        }
        if !(d.fov_deg > 0.0 && d.fov_deg < 180.0) {
            return Err(invalid("detector.fov_deg", "must lie in (0, 180)"));
        }
        for (name, [lo, hi]) in [
            ("detector.confidence.barrier", d.confidence.barrier),
            ("detector.confidence.traffic_cone", d.confidence.traffic_cone),
            ("detector.confidence.panel", d.confidence.panel),
        ] {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(invalid(name, "must be an ordered range within [0, 1]"));
            }
        }
        if let Err(f) = self.calibration.validate() {
            return Err(invalid(format!("calibration.{f}"), "invalid"));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.footprint.len() < 3 {
                return Err(invalid(format!("objects[{i}].footprint"), "needs at least three vertices"));
            }
            if o.footprint.iter().flatten().any(|v| !v.is_finite()) {
                return Err(invalid(format!("objects[{i}].footprint"), "non-finite vertex"));
            }
            if !(o.height() > 0.0) {
                return Err(invalid(format!("objects[{i}].height"), "must be positive"));
            }
            if !(o.support_offset >= 0.0) {
                return Err(invalid(format!("objects[{i}].support_offset"), "must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| invalid(toml_error_field(&e), e.message().to_string()))?;
        s.validate()?;
        Ok(s)
    }
}

// best-effort field name for a TOML error
fn toml_error_field(e: &toml::de::Error) -> String {
    let msg = e.message();
    if let Some(rest) = msg.split('`').nth(1) {
        return rest.to_string();
    }
    "scenario".to_string()
}
