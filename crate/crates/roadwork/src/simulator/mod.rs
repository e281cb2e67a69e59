//! Synthetic drives: sensor streams with ground truth, and corner-error
//! evaluation of site records against that ground truth.

mod evaluate;
mod generate;
mod path;
pub mod presets;
mod scenario;
mod truth;

pub use evaluate::{evaluate, mean_and_sd, CornerError, EvaluateError, Evaluation, PAIRING_GATE};
pub use generate::{generate_streams, visible_contour, GeneratedStreams, GROUND_TRUTH_FILE};
pub use path::PathTrack;
pub use scenario::{ConfidenceRanges, DetectorModel, PathVertex, Scenario, ScenarioError, ScenarioObject};
pub use truth::{ground_truth, GroundTruth, GroundTruthSite};
