use std::path::{Path, PathBuf};

use cogspeech::config::EngineConfig;
use cogspeech::model_io::load_grammar;
use cogspeech::resources::load_resources;
use cogspeech::synth::{generate_corpus, SynthConfig};
use cogspeech::train::{grammar_dataset, train_grammar};
use cogspeech_core::text_biomarkers::GrammarModel;

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: length");
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol, "{what}[{i}]: {x} vs {y}");
    }
}

fn assert_grammar_close(a: &GrammarModel, b: &GrammarModel, tol: f64) {
    assert_eq!(a.coefficients.keys().collect::<Vec<_>>(), b.coefficients.keys().collect::<Vec<_>>());
    for (k, v) in &a.coefficients {
        assert!((v - b.coefficients[k]).abs() <= tol, "coefficient {k}");
    }
    assert!((a.intercept - b.intercept).abs() <= tol);
    assert_eq!(a.scaler.names, b.scaler.names);
    assert_close(&a.scaler.means, &b.scaler.means, tol, "means");
    assert_close(&a.scaler.stds, &b.scaler.stds, tol, "stds");
}

#[test]
fn shipped_config_is_the_default() {
    let dir = repo_root().join("config");
    let mut cfg = EngineConfig::load(&dir.join("cogspeech.toml")).unwrap();
    assert_eq!(cfg.server.log_dir, dir.join("../sessions"));
    assert_eq!(cfg.models.grammar.take(), Some(dir.join("../models/grammar.json")));
    cfg.server.log_dir = EngineConfig::default().server.log_dir;
    assert_eq!(cfg, EngineConfig::default());
}

#[test]
fn shipped_grammar_model_is_the_default() {
    let m = load_grammar(&repo_root().join("models/grammar.json")).unwrap();
    assert_grammar_close(&m, &GrammarModel::default(), 1e-6);
}

#[test]
fn default_scaler_refits_from_synthetic_corpus() {
    let corpus = generate_corpus(&SynthConfig { samples: 200, seed: 7, duration_s: 30.0, ..SynthConfig::default() }).unwrap();
    let samples: Vec<_> = corpus.iter().map(|s| (s.utterances.clone(), s.label)).collect();
    let res = load_resources(&EngineConfig::default()).unwrap();
    let raw = grammar_dataset(&samples, &res.tagger).unwrap();
    let t = train_grammar(&raw, 3, 0).unwrap();
    assert_grammar_close(&t.published, &GrammarModel::default(), 1e-6);
}
