//! Training the grammar and acoustic models from labelled corpora.
//!
//! Acoustic models are trained per chunk: every complete chunk of a
//! recording is one labelled row. Cross-validation folds are drawn over
//! chunks, so chunks of one speaker can land on both sides of a fold and
//! the reported metrics are optimistic for unseen speakers.

use anyhow::{bail, ensure, Context, Result};
use cogspeech_core::dsp::{AcousticPipeline, AudioBuffer, FeatureSetSplit};
use cogspeech_core::linguistics::{raw_grammar_counts, GrammarFeature, Tagger};
use cogspeech_core::models::{
    cross_validate, select_top_k_features, train_logistic, train_random_forest, Dataset, ForestHyper, ForestLearner,
    LogisticHyper, LogisticLearner, MetricsReport, ModelParams, Scaler, TrainedClassifier, TreeLearner,
};
use cogspeech_core::text_biomarkers::GrammarModel;
use cogspeech_core::{Label, UtteranceRecord};

use crate::batch::par_map;
use crate::corpus::{read_transcript, ManifestRow};
use crate::wav::read_wav;

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_SELECT_K: usize = 18;

/// One row of raw grammar counts per sample, labelled 1 for dementia.
pub fn grammar_dataset(samples: &[(Vec<UtteranceRecord>, Label)], tagger: &Tagger) -> Result<Dataset> {
    let mut rows = Vec::with_capacity(samples.len());
    let mut labels = Vec::with_capacity(samples.len());
    for (utts, label) in samples {
        let raw = raw_grammar_counts(utts, tagger)?;
        rows.push(raw.iter().map(|&c| c as f64).collect());
        labels.push(label.class());
    }
    Ok(Dataset::new(rows, labels, GrammarFeature::names())?)
}

#[derive(Debug, Clone)]
pub struct GrammarTraining {
    /// Logistic regression refitted on the corpus.
    pub fitted: GrammarModel,
    /// Published coefficients with the corpus standardization.
    pub published: GrammarModel,
    /// Cross-validated metrics per model family.
    pub comparison: Vec<(String, MetricsReport)>,
}

pub fn train_grammar(raw: &Dataset, folds: usize, seed: u64) -> Result<GrammarTraining> {
    let scaler = Scaler::fit(raw);
    let z = scaler.transform(raw);
    let hyper = LogisticHyper { learning_rate: 0.1, epochs: 2000, l2: 1e-3 };
    let logistic = train_logistic(&z, &hyper)?;
    let ModelParams::Logistic { weights, intercept } = &logistic.params else {
        bail!("logistic training returned a different model kind");
    };
    let coefficients = raw.feature_names().iter().cloned().zip(weights.iter().copied()).collect();
    let fitted = GrammarModel::new(coefficients, *intercept, scaler.clone())?;
    let published = GrammarModel::published(scaler);

    let forest = ForestLearner { hyper: ForestHyper { seed, ..ForestHyper::default() } };
    let comparison = vec![
        ("Logistic Regression".to_string(), cross_validate(raw, &LogisticLearner { hyper, standardize: true }, folds, seed)?),
        ("Random Forest".to_string(), cross_validate(raw, &forest, folds, seed)?),
        ("Decision Tree".to_string(), cross_validate(raw, &TreeLearner::default(), folds, seed)?),
    ];
    Ok(GrammarTraining { fitted, published, comparison })
}

/// Coefficients in feature order.
pub fn grammar_coefficients(model: &GrammarModel) -> Vec<(String, f64)> {
    GrammarFeature::names()
        .into_iter()
        .map(|n| {
            let c = model.coefficients[&n];
            (n, c)
        })
        .collect()
}

/// Chunk rows of every recording in registry order, one label per chunk.
pub fn chunk_dataset(pipeline: &AcousticPipeline, recordings: &[(AudioBuffer, Label)]) -> Result<Dataset> {
    let per = par_map(recordings, |(audio, label)| {
        pipeline.recording_features(audio).map(|c| (c.rows, label.class()))
    });
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for r in per {
        let (chunks, label) = r?;
        labels.extend(std::iter::repeat(label).take(chunks.len()));
        rows.extend(chunks);
    }
    Ok(Dataset::new(rows, labels, pipeline.registry().names())?)
}

#[derive(Debug, Clone)]
pub struct AcousticTraining {
    pub prosody: TrainedClassifier,
    pub pronunciation: TrainedClassifier,
    /// Pronunciation features kept by importance, most important first.
    pub selected: Vec<String>,
    pub prosody_cv: MetricsReport,
    pub pronunciation_cv: MetricsReport,
}

/// Random forests over the prosody set and over the `k` most important
/// pronunciation features, both joined by the voice-quality features.
pub fn train_acoustic(
    chunks: &Dataset,
    split: &FeatureSetSplit,
    k: usize,
    hyper: ForestHyper,
    folds: usize,
) -> Result<AcousticTraining> {
    let (zero, one) = chunks.class_counts();
    ensure!(zero > 0 && one > 0, "acoustic training needs chunks of both classes ({zero} control, {one} dementia)");
    let learner = ForestLearner { hyper };

    let prosody_data = chunks.select_named(&split.prosody_model_names())?;
    let prosody = train_random_forest(&prosody_data, &hyper)?;
    let prosody_cv = cross_validate(&prosody_data, &learner, folds, hyper.seed)?;

    let full = chunks.select_named(&split.pronunciation_names)?;
    let ranking = train_random_forest(&full, &hyper)?;
    let (_, selected) = select_top_k_features(&ranking, &full, k)?;
    let names: Vec<String> = selected.iter().chain(&split.voice_quality_names).cloned().collect();
    let pron_data = chunks.select_named(&names)?;
    let pronunciation = train_random_forest(&pron_data, &hyper)?;
    let pronunciation_cv = cross_validate(&pron_data, &learner, folds, hyper.seed)?;

    Ok(AcousticTraining { prosody, pronunciation, selected, prosody_cv, pronunciation_cv })
}

/// Transcripts of the labelled manifest rows.
pub fn load_labelled_transcripts(rows: &[ManifestRow]) -> Result<Vec<(Vec<UtteranceRecord>, Label)>> {
    let out: Vec<_> = rows
        .iter()
        .filter_map(|r| r.label.map(|l| (r, l)))
        .map(|(r, l)| Ok((read_transcript(&r.transcript, &r.sample_id)?, l)))
        .collect::<Result<_>>()?;
    ensure!(!out.is_empty(), "manifest has no labelled samples");
    Ok(out)
}

/// Recordings of the labelled manifest rows that list audio.
pub fn load_labelled_audio(rows: &[ManifestRow]) -> Result<Vec<(AudioBuffer, Label)>> {
    let out: Vec<_> = rows
        .iter()
        .filter_map(|r| Some((r.audio.as_ref()?, r.label?, r)))
        .map(|(p, l, r)| Ok((read_wav(p).with_context(|| r.sample_id.clone())?, l)))
        .collect::<Result<_>>()?;
    ensure!(!out.is_empty(), "manifest has no labelled samples with audio");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_corpus, SynthConfig};
    use cogspeech_core::models::ProbabilisticClassifier;

    fn corpus(n: usize, duration_s: f64) -> Vec<crate::synth::SynthSample> {
        generate_corpus(&SynthConfig { samples: n, seed: 11, duration_s, ..SynthConfig::default() }).unwrap()
    }

    #[test]
    fn grammar_training_fits_and_compares() {
        let samples: Vec<_> = corpus(40, 20.0).into_iter().map(|s| (s.utterances, s.label)).collect();
        let raw = grammar_dataset(&samples, &Tagger::default()).unwrap();
        assert_eq!(raw.len(), 40);
        assert_eq!(raw.width(), 10);
        let t = train_grammar(&raw, 5, 3).unwrap();
        assert_eq!(t.comparison.len(), 3);
        assert_eq!(t.published.scaler, t.fitted.scaler);
        assert_eq!(grammar_coefficients(&t.published)[7], ("total_words".to_string(), 1.238682));
        let (lr_acc, chance) = (t.comparison[0].1.accuracy, 0.5);
        assert!(lr_acc > chance, "logistic CV accuracy {lr_acc}");
    }

    #[test]
    fn acoustic_training_shapes() {
        let samples = corpus(8, 10.0);
        let recs: Vec<_> = samples.iter().map(|s| (s.audio.clone(), s.label)).collect();
        let pipeline = AcousticPipeline::default();
        let chunks = chunk_dataset(&pipeline, &recs).unwrap();
        let expected: usize = samples.iter().map(|s| (s.audio.duration_s() / 5.0) as usize).sum();
        assert_eq!(chunks.len(), expected);
        let split = pipeline.registry().split().unwrap();
        let hyper = ForestHyper { n_trees: 15, seed: 1, ..ForestHyper::default() };
        let t = train_acoustic(&chunks, &split, DEFAULT_SELECT_K, hyper, 4).unwrap();
        assert_eq!(t.prosody.feature_names.len(), 10);
        assert_eq!(t.selected.len(), 18);
        assert_eq!(t.pronunciation.feature_names.len(), 22);
        assert_eq!(&t.pronunciation.feature_names[18..], split.voice_quality_names.as_slice());
        let row = t.prosody.project(&chunks.feature_names().to_vec(), &chunks.rows()[0]).unwrap();
        assert!((0.0..=1.0).contains(&t.prosody.predict_proba(&row)));
    }

    #[test]
    fn single_class_chunks_are_rejected() {
        let samples = corpus(4, 5.0);
        let recs: Vec<_> = samples.iter().filter(|s| s.label == Label::Control).map(|s| (s.audio.clone(), s.label)).collect();
        let pipeline = AcousticPipeline::default();
        let chunks = chunk_dataset(&pipeline, &recs).unwrap();
        let split = pipeline.registry().split().unwrap();
        assert!(train_acoustic(&chunks, &split, 18, ForestHyper::default(), 2).is_err());
    }
}
