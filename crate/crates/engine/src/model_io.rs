//! Versioned JSON model files.
//!
//! ```json
//! {"format": "cogspeech-classifier", "version": 1, "model": { ... }}
//! ```

use std::path::Path;

use anyhow::{ensure, Context, Result};
use cogspeech_core::models::TrainedClassifier;
use cogspeech_core::text_biomarkers::GrammarModel;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const MODEL_VERSION: u32 = 1;
pub const CLASSIFIER_FORMAT: &str = "cogspeech-classifier";
pub const GRAMMAR_FORMAT: &str = "cogspeech-grammar";

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    model: T,
}

fn save<T: Serialize>(path: &Path, format: &str, model: &T) -> Result<()> {
    let env = Envelope { format: format.into(), version: MODEL_VERSION, model };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn parse<T: DeserializeOwned>(text: &str, format: &str) -> Result<T> {
    let env: Envelope<serde_json::Value> = serde_json::from_str(text)?;
    ensure!(env.format == format, "expected a {format} file, found {}", env.format);
    ensure!(env.version == MODEL_VERSION, "unsupported model version {}", env.version);
    Ok(serde_json::from_value(env.model)?)
}

pub fn save_classifier(path: &Path, model: &TrainedClassifier) -> Result<()> {
    save(path, CLASSIFIER_FORMAT, model)
}

pub fn parse_classifier(text: &str) -> Result<TrainedClassifier> {
    let m: TrainedClassifier = parse(text, CLASSIFIER_FORMAT)?;
    m.validate()?;
    Ok(m)
}

pub fn load_classifier(path: &Path) -> Result<TrainedClassifier> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_classifier(&text).with_context(|| path.display().to_string())
}

pub fn save_grammar(path: &Path, model: &GrammarModel) -> Result<()> {
    save(path, GRAMMAR_FORMAT, model)
}

pub fn parse_grammar(text: &str) -> Result<GrammarModel> {
    let m: GrammarModel = parse(text, GRAMMAR_FORMAT)?;
    m.validate()?;
    Ok(m)
}

pub fn load_grammar(path: &Path) -> Result<GrammarModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_grammar(&text).with_context(|| path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cogspeech_core::models::{train_logistic, Dataset, LogisticHyper};

    #[test]
    fn classifier_round_trip() {
        let d = Dataset::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.1, 0.9], vec![0.9, 0.2]],
            vec![0, 1, 0, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let m = train_logistic(&d, &LogisticHyper::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_classifier(&path, &m).unwrap();
        assert_eq!(load_classifier(&path).unwrap(), m);
        assert!(load_grammar(&path).is_err());
    }

    #[test]
    fn rejects_wrong_version_and_inconsistent_models() {
        assert!(parse_classifier(r#"{"format":"cogspeech-classifier","version":2,"model":{}}"#).is_err());
        let bad = r#"{"format":"cogspeech-classifier","version":1,"model":
            {"feature_names":["a"],"params":{"kind":"logistic","weights":[1.0,2.0],"intercept":0.0}}}"#;
        assert!(parse_classifier(bad).is_err());
    }

    #[test]
    fn grammar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        save_grammar(&path, &GrammarModel::default()).unwrap();
        assert_eq!(load_grammar(&path).unwrap(), GrammarModel::default());
    }
}
