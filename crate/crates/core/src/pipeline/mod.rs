//! Session workflow: detection files, per-detection descriptors, identity
//! assignment, scoring, synthetic sequences and overlays.

pub mod detections;
pub mod evaluate;
pub mod extract;
pub mod overlay;
pub mod session;
pub mod synth;

pub use detections::{parse_detections, Detection, DetectionsFile, FrameDetections};
pub use evaluate::{evaluate, ScenarioReport, SessionReport};
pub use extract::{build_feature_vector, features_to_jsonl};
pub use overlay::{render_overlay, IdentityPalette};
pub use session::{extract_features, run_session, FrameSource, InMemoryFrames, SessionLog, SessionOutput};
pub use synth::{synth_scenario, ScenarioSpec, SyntheticScenario};
