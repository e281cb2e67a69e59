//! Session configuration file (TOML). Every section is optional and falls
//! back to the published constants.
//!
//! ```toml
//! [threshold]
//! fps = 13.0
//!
//! [utm_anchor]
//! easting = 431000.0
//! northing = 5800000.0
//! zone = "32U"
//!
//! [session]
//! input_dir = "drive01"
//! ```

use std::path::{Path, PathBuf};

use roadwork_core::engine::EngineConfig;
use roadwork_core::{ConfidencePolicy, MatchParams, SensorModelParams, SeparationPolicy, ThresholdParams, UtmAnchor};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionPaths {
    /// Directory holding the three stream files; relative to the config file.
    pub input_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Command speaking the detector line protocol; replaces the detections
    /// file when set.
    pub detector_command: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub calibration: SensorModelParams,
    pub threshold: ThresholdParams,
    pub confidence: ConfidencePolicy,
    pub matching: MatchParams,
    pub separation: SeparationPolicy,
    pub utm_anchor: Option<UtmAnchor>,
    pub session: SessionPaths,
}

impl SessionConfig {
    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            calibration: self.calibration,
            threshold: self.threshold,
            confidence: self.confidence,
            matching: self.matching,
            separation: self.separation,
            utm_anchor: self.utm_anchor.clone(),
        }
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: SessionConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.engine_config().validate().map_err(|e| ConfigError::Invalid {
            path: path.to_path_buf(),
            field: format!("{}.{}", e.section, e.field),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    /// Loads and validates a config file. A relative `input_dir` is resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text, path)?;
        if let Some(dir) = cfg.session.input_dir.as_mut() {
            if dir.is_relative() {
                *dir = path.parent().unwrap_or(Path::new(".")).join(&*dir);
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SessionConfig, ConfigError> {
        SessionConfig::parse(text, Path::new("session.toml"))
    }

    #[test]
    fn empty_file_gives_published_defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.engine_config(), EngineConfig::default());
        assert_eq!(cfg.threshold.a, 5.0);
        assert_eq!(cfg.confidence.barrier_threshold, 0.75);
        assert_eq!(cfg.separation.panel_panel_longitudinal, 12.0);
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let cfg = parse("[matching]\niou_threshold = 0.4\n").unwrap();
        assert_eq!(cfg.matching.iou_threshold, 0.4);
        assert_eq!(cfg.matching.size_ratio_limit, 2.0);
    }

    #[test]
    fn invalid_value_names_the_field() {
        let e = parse("[confidence]\nbarrier_threshold = 1.5\n").unwrap_err();
        assert!(matches!(&e, ConfigError::Invalid { field, .. } if field == "confidence.barrier_threshold"), "{e}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let e = parse("[threshold]\nalpha = 3.0\n").unwrap_err();
        assert!(e.to_string().contains("alpha"), "{e}");
    }

    #[test]
    fn bad_rotation_is_rejected() {
        let text = "[calibration.extrinsic]\nrotation = [[2.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]]\ntranslation = [0.0,0.0,0.0]\n";
        assert!(parse(text).is_err());
    }
}
