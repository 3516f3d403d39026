//! Builds the shared biomarker resources from configured files, falling
//! back to the bundled lexicon, embeddings, registry and grammar model.

use anyhow::{Context, Result};
use cogspeech_core::dsp::{AcousticPipeline, FeatureRegistry};
use cogspeech_core::linguistics::Tagger;
use cogspeech_core::scoring::BiomarkerResources;
use cogspeech_core::text_biomarkers::{GrammarModel, WordVectorLexicon};

use crate::config::EngineConfig;
use crate::model_io::{load_classifier, load_grammar};

/// Topic embeddings shipped with the engine.
pub const BUNDLED_EMBEDDINGS: &str = include_str!("../resources/embeddings.txt");

fn read(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_resources(cfg: &EngineConfig) -> Result<BiomarkerResources> {
    let m = &cfg.models;
    let tagger = match &m.lexicon {
        Some(p) => Tagger::from_tsv(&read(p)?).with_context(|| p.display().to_string())?,
        None => Tagger::default(),
    };
    let lexicon = match &m.embeddings {
        Some(p) => WordVectorLexicon::from_text(&read(p)?).with_context(|| p.display().to_string())?,
        None => WordVectorLexicon::from_text(BUNDLED_EMBEDDINGS).context("bundled embeddings")?,
    };
    let registry = match &m.registry {
        Some(p) => FeatureRegistry::from_tsv(&read(p)?).with_context(|| p.display().to_string())?,
        None => FeatureRegistry::default(),
    };
    let grammar = match &m.grammar {
        Some(p) => load_grammar(p)?,
        None => GrammarModel::default(),
    };
    let res = BiomarkerResources {
        tagger,
        grammar,
        lexicon,
        acoustic: AcousticPipeline::new(cfg.frames, registry)?,
        prosody_model: m.prosody.as_deref().map(load_classifier).transpose()?,
        pronunciation_model: m.pronunciation.as_deref().map(load_classifier).transpose()?,
    };
    res.validate()?;
    Ok(res)
}
