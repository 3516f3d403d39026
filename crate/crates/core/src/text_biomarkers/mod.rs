//! Transcript-side biomarkers: altered grammar, anomia, pragmatic
//! impairment and disrupted turn taking. Every score is in `[0, 1]` with
//! higher meaning more impaired.

pub mod anomia;
pub mod grammar;
pub mod pragmatics;
pub mod turn_taking;

pub use anomia::{anomia_from_rates, anomia_score, count_fillers, speech_rates, AnomiaWeights, FillerLexicon, SpeechRates};
pub use grammar::{grammar_score, GrammarModel};
pub use pragmatics::{pragmatics_score, session_pragmatics, WordVectorLexicon, DEFAULT_COHERENCE_WINDOW};
pub use turn_taking::{count_interruptions, interruption_rate, turn_taking_score, DEFAULT_TURN_TAKING_CAP};
