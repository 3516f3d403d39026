//! Per-session biomarker orchestration.
//!
//! [`SessionScorer`] only buffers on ingest. All analysis happens in
//! [`SessionScorer::emit_scores`], which the caller runs on a worker so the
//! dialogue path never waits for it.

mod config;
mod scorer;

pub use config::{BiomarkerResources, ScoringConfig, DEFAULT_CADENCE_MS};
pub use scorer::{compute_scores, SessionScorer};
