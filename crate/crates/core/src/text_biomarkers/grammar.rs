//! Altered-grammar score: logistic function of a linear combination of the
//! ten standardized grammar features.

use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linguistics::{GrammarFeature, GrammarFeatureVector, GRAMMAR_FEATURES};
use crate::models::{sigmoid, Scaler};

/// Published multiple-logistic-regression weights, in feature order.
pub const PUBLISHED_COEFFICIENTS: [(GrammarFeature, f64); 10] = [
    (GrammarFeature::CoordinatedSentences, 0.469133),
    (GrammarFeature::SubordinatedSentences, 0.140325),
    (GrammarFeature::ReducedSentences, -0.773910),
    (GrammarFeature::Predicates, 0.304633),
    (GrammarFeature::ProductionRules, 0.023355),
    (GrammarFeature::FunctionWords, -0.115484),
    (GrammarFeature::UniqueWords, 0.040963),
    (GrammarFeature::TotalWords, 1.238682),
    (GrammarFeature::CharacterLength, -1.814850),
    (GrammarFeature::ImmediateRepetitions, 0.707059),
];

// Standardization fitted on the bundled synthetic training corpus
// (`cogspeech synth --samples 200 --seed 7`), feature order as above.
const DEFAULT_MEANS: [f64; 10] = [1.01, 0.875, 3.075, 8.185, 16.245, 22.175, 28.615, 51.59, 229.17, 1.92];
const DEFAULT_STDS: [f64; 10] =
    [1.053518, 0.974359, 1.915561, 2.993455, 2.542632, 6.368232, 5.165924, 10.896417, 49.755714, 1.540649];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrammarModel {
    pub coefficients: BTreeMap<String, f64>,
    #[serde(default)]
    pub intercept: f64,
    pub scaler: Scaler,
}

impl Default for GrammarModel {
    fn default() -> Self {
        let scaler = Scaler::new(GrammarFeature::names(), DEFAULT_MEANS.to_vec(), DEFAULT_STDS.to_vec())
            .expect("default grammar scaler is valid");
        GrammarModel::published(scaler)
    }
}

impl GrammarModel {
    /// The published coefficients with a zero intercept.
    pub fn published(scaler: Scaler) -> Self {
        let coefficients =
            PUBLISHED_COEFFICIENTS.iter().map(|(f, b)| (String::from(f.name()), *b)).collect();
        GrammarModel { coefficients, intercept: 0.0, scaler }
    }

    pub fn new(coefficients: BTreeMap<String, f64>, intercept: f64, scaler: Scaler) -> Result<Self> {
        let m = GrammarModel { coefficients, intercept, scaler };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.len() != GRAMMAR_FEATURES.len() {
            return Err(Error::invalid(alloc::format!(
                "grammar model has {} coefficients, expected 10",
                self.coefficients.len()
            )));
        }
        for f in GRAMMAR_FEATURES {
            let b = self
                .coefficients
                .get(f.name())
                .ok_or_else(|| Error::MissingFeature(f.name().into()))?;
            if !b.is_finite() {
                return Err(Error::invalid(alloc::format!("coefficient {} is not finite", f.name())));
            }
            self.scaler.position(f.name()).ok_or_else(|| Error::MissingFeature(f.name().into()))?;
        }
        Ok(())
    }

    pub fn coefficient(&self, f: GrammarFeature) -> Result<f64> {
        self.coefficients.get(f.name()).copied().ok_or_else(|| Error::MissingFeature(f.name().into()))
    }
}

/// `sigmoid(intercept + sum(beta_i * z_i))` over the standardized features.
pub fn grammar_score(features: &GrammarFeatureVector, model: &GrammarModel) -> Result<f64> {
    let mut z = model.intercept;
    for f in GRAMMAR_FEATURES {
        z += model.coefficient(f)? * features.z(f);
    }
    Ok(sigmoid(z))
}
