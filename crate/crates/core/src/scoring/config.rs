use alloc::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dsp::AcousticPipeline;
use crate::error::{Error, Result};
use crate::linguistics::Tagger;
use crate::models::TrainedClassifier;
use crate::text_biomarkers::{
    AnomiaWeights, FillerLexicon, GrammarModel, WordVectorLexicon, DEFAULT_COHERENCE_WINDOW,
    DEFAULT_TURN_TAKING_CAP,
};
use crate::types::BiomarkerKind;

pub const DEFAULT_CADENCE_MS: i64 = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringConfig {
    pub cadence_ms: i64,
    pub enabled: BTreeSet<BiomarkerKind>,
    pub coherence_window: usize,
    pub turn_taking_cap: f64,
    pub anomia: AnomiaWeights,
    pub fillers: FillerLexicon,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig::live()
    }
}

impl ScoringConfig {
    /// All six biomarkers.
    pub fn live() -> Self {
        ScoringConfig {
            cadence_ms: DEFAULT_CADENCE_MS,
            enabled: BiomarkerKind::ALL.into_iter().collect(),
            coherence_window: DEFAULT_COHERENCE_WINDOW,
            turn_taking_cap: DEFAULT_TURN_TAKING_CAP,
            anomia: AnomiaWeights::default(),
            fillers: FillerLexicon::default(),
        }
    }

    /// Corpus recordings have too few hand-offs for turn taking.
    pub fn batch() -> Self {
        let mut c = ScoringConfig::live();
        c.enabled.remove(&BiomarkerKind::TurnTaking);
        c
    }

    pub fn is_enabled(&self, kind: BiomarkerKind) -> bool {
        self.enabled.contains(&kind)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cadence_ms <= 0 {
            return Err(Error::invalid("cadence must be positive"));
        }
        if self.coherence_window == 0 {
            return Err(Error::invalid("coherence window must be at least 1"));
        }
        if !(self.turn_taking_cap.is_finite() && self.turn_taking_cap > 0.0) {
            return Err(Error::invalid("turn-taking cap must be positive"));
        }
        self.anomia.validate()
    }
}

/// Models and lexica shared by every session.
#[derive(Debug, Clone)]
pub struct BiomarkerResources {
    pub tagger: Tagger,
    pub grammar: GrammarModel,
    pub lexicon: WordVectorLexicon,
    pub acoustic: AcousticPipeline,
    pub prosody_model: Option<TrainedClassifier>,
    pub pronunciation_model: Option<TrainedClassifier>,
}

impl BiomarkerResources {
    /// Checks every acoustic model reads only registry features.
    pub fn validate(&self) -> Result<()> {
        let names = self.acoustic.registry().names();
        for m in [&self.prosody_model, &self.pronunciation_model].into_iter().flatten() {
            m.validate()?;
            if let Some(missing) = m.feature_names.iter().find(|n| !names.contains(n)) {
                return Err(Error::MissingFeature(missing.clone()));
            }
        }
        self.grammar.validate()
    }
}
