use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::lld::Lld;
use crate::error::{Error, Result};

const DEFAULT_REGISTRY: &str = include_str!("../../resources/features.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureCategory {
    Prosody,
    VoiceQuality,
    Pronunciation,
}

impl FeatureCategory {
    pub fn name(self) -> &'static str {
        match self {
            FeatureCategory::Prosody => "prosody",
            FeatureCategory::VoiceQuality => "voice_quality",
            FeatureCategory::Pronunciation => "pronunciation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [FeatureCategory::Prosody, FeatureCategory::VoiceQuality, FeatureCategory::Pronunciation]
            .into_iter()
            .find(|c| c.name() == s)
    }
}

/// Statistic summarising one descriptor over a chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Functional {
    Mean,
    /// Population standard deviation.
    Std,
    Range,
    /// Mean absolute frame-to-frame difference.
    DeltaMean,
    /// Least-squares slope against time, per second.
    Slope,
    /// Fraction of frames that are voiced.
    VoicedFraction,
    /// Local maxima above the chunk mean, per second.
    PeakRate,
}

impl Functional {
    pub fn name(self) -> &'static str {
        match self {
            Functional::Mean => "mean",
            Functional::Std => "std",
            Functional::Range => "range",
            Functional::DeltaMean => "delta_mean",
            Functional::Slope => "slope",
            Functional::VoicedFraction => "voiced_fraction",
            Functional::PeakRate => "peak_rate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Functional::Mean,
            Functional::Std,
            Functional::Range,
            Functional::DeltaMean,
            Functional::Slope,
            Functional::VoicedFraction,
            Functional::PeakRate,
        ]
        .into_iter()
        .find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpec {
    pub name: String,
    pub category: FeatureCategory,
    pub lld: Lld,
    pub functional: Functional,
    /// Restrict the functional to voiced frames.
    pub voiced_only: bool,
}

/// Ordered acoustic feature inventory. Its order is the column order of
/// every chunk matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRegistry {
    specs: Vec<FeatureSpec>,
}

impl Default for FeatureRegistry {
    fn default() -> Self {
        FeatureRegistry::from_tsv(DEFAULT_REGISTRY).expect("bundled feature registry parses")
    }
}

impl FeatureRegistry {
    /// Parses `name, category, lld, functional, voiced_only` rows after a
    /// header line. `#` lines are comments.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut specs = Vec::new();
        let mut seen = BTreeSet::new();
        let mut header = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if !header {
                if cols != ["name", "category", "lld", "functional", "voiced_only"] {
                    return Err(Error::parse(i + 1, "expected registry header"));
                }
                header = true;
                continue;
            }
            let [name, category, lld, functional, voiced] = cols[..] else {
                return Err(Error::parse(i + 1, "expected 5 columns"));
            };
            let err = |what: &str, v: &str| Error::parse(i + 1, alloc::format!("unknown {what} {v:?}"));
            let spec = FeatureSpec {
                name: name.to_string(),
                category: FeatureCategory::parse(category).ok_or_else(|| err("category", category))?,
                lld: Lld::parse(lld).ok_or_else(|| err("descriptor", lld))?,
                functional: Functional::parse(functional).ok_or_else(|| err("functional", functional))?,
                voiced_only: match voiced {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    _ => return Err(err("voiced flag", voiced)),
                },
            };
            if !seen.insert(spec.name.clone()) {
                return Err(Error::parse(i + 1, alloc::format!("duplicate feature {name:?}")));
            }
            specs.push(spec);
        }
        if specs.is_empty() {
            return Err(Error::parse(0, "registry has no features"));
        }
        Ok(FeatureRegistry { specs })
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.name.clone()).collect()
    }

    pub fn names_in(&self, category: FeatureCategory) -> Vec<String> {
        self.specs.iter().filter(|s| s.category == category).map(|s| s.name.clone()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    pub fn split(&self) -> Result<FeatureSetSplit> {
        FeatureSetSplit::new(
            self.names_in(FeatureCategory::Prosody),
            self.names_in(FeatureCategory::Pronunciation),
            self.names_in(FeatureCategory::VoiceQuality),
        )
    }
}

/// Partition of the inventory into the two model inputs and the shared
/// voice-quality group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSetSplit {
    pub prosody_names: Vec<String>,
    pub pronunciation_names: Vec<String>,
    pub voice_quality_names: Vec<String>,
}

impl FeatureSetSplit {
    pub const PROSODY: usize = 6;
    pub const PRONUNCIATION: usize = 59;
    pub const VOICE_QUALITY: usize = 4;

    pub fn new(
        prosody_names: Vec<String>,
        pronunciation_names: Vec<String>,
        voice_quality_names: Vec<String>,
    ) -> Result<Self> {
        let sizes = [
            ("prosody", prosody_names.len(), Self::PROSODY),
            ("pronunciation", pronunciation_names.len(), Self::PRONUNCIATION),
            ("voice quality", voice_quality_names.len(), Self::VOICE_QUALITY),
        ];
        for (what, got, want) in sizes {
            if got != want {
                return Err(Error::invalid(alloc::format!("{what} set has {got} features, expected {want}")));
            }
        }
        let mut all = BTreeSet::new();
        for n in prosody_names.iter().chain(&pronunciation_names).chain(&voice_quality_names) {
            if !all.insert(n.as_str()) {
                return Err(Error::invalid(alloc::format!("feature {n:?} is in more than one set")));
            }
        }
        Ok(FeatureSetSplit { prosody_names, pronunciation_names, voice_quality_names })
    }

    /// Inputs of the prosody classifier: prosody then voice quality.
    pub fn prosody_model_names(&self) -> Vec<String> {
        self.prosody_names.iter().chain(&self.voice_quality_names).cloned().collect()
    }

    /// Inputs of the pronunciation classifier: pronunciation then voice quality.
    pub fn pronunciation_model_names(&self) -> Vec<String> {
        self.pronunciation_names.iter().chain(&self.voice_quality_names).cloned().collect()
    }
}
