use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::logistic::sigmoid;
use super::tree::DecisionTree;
use super::{Dataset, Scaler};
use crate::error::{Error, Result};

pub trait ProbabilisticClassifier {
    /// Probability of class 1, in `[0, 1]`.
    fn predict_proba(&self, row: &[f64]) -> f64;

    fn predict(&self, row: &[f64]) -> u8 {
        u8::from(self.predict_proba(row) >= 0.5)
    }
}

/// Anything the cross-validation harness can train.
pub trait Learner {
    type Model: ProbabilisticClassifier;

    fn fit(&self, data: &Dataset, seed: u64) -> Result<Self::Model>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Logistic,
    RandomForest,
    DecisionTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Logistic { weights: Vec<f64>, intercept: f64 },
    RandomForest { trees: Vec<DecisionTree> },
    DecisionTree { tree: DecisionTree },
}

/// A fitted model together with the feature order it expects. When a
/// scaler is present, rows are standardized before prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaler: Option<Scaler>,
    pub params: ModelParams,
}

impl TrainedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        match self.params {
            ModelParams::Logistic { .. } => ClassifierKind::Logistic,
            ModelParams::RandomForest { .. } => ClassifierKind::RandomForest,
            ModelParams::DecisionTree { .. } => ClassifierKind::DecisionTree,
        }
    }

    /// Checks internal consistency after deserialization.
    pub fn validate(&self) -> Result<()> {
        let width = self.feature_names.len();
        if let Some(s) = &self.scaler {
            if s.names != self.feature_names {
                return Err(Error::invalid("scaler feature names differ from model feature names"));
            }
        }
        match &self.params {
            ModelParams::Logistic { weights, intercept } => {
                if weights.len() != width {
                    return Err(Error::invalid("logistic weight count differs from feature count"));
                }
                if !intercept.is_finite() || weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::invalid("logistic parameters are not finite"));
                }
            }
            ModelParams::RandomForest { trees } => {
                if trees.is_empty() {
                    return Err(Error::invalid("random forest has no trees"));
                }
                for t in trees {
                    t.validate(width)?;
                }
            }
            ModelParams::DecisionTree { tree } => tree.validate(width)?,
        }
        Ok(())
    }

    /// Fraction of trees voting for class 1. Only meaningful for forests.
    pub fn votes(&self, row: &[f64]) -> Option<usize> {
        match &self.params {
            ModelParams::RandomForest { trees } => {
                let x = self.prepare(row);
                Some(trees.iter().filter(|t| t.predict(&x) == 1).count())
            }
            _ => None,
        }
    }

    fn prepare(&self, row: &[f64]) -> Vec<f64> {
        match &self.scaler {
            Some(s) => s.transform_row(row),
            None => row.to_vec(),
        }
    }

    /// Picks this model's columns out of a row laid out as `names`.
    pub fn project(&self, names: &[String], row: &[f64]) -> Result<Vec<f64>> {
        self.feature_names
            .iter()
            .map(|f| {
                names
                    .iter()
                    .position(|n| n == f)
                    .map(|i| row[i])
                    .ok_or_else(|| Error::MissingFeature(f.clone()))
            })
            .collect()
    }
}

impl ProbabilisticClassifier for TrainedClassifier {
    fn predict_proba(&self, row: &[f64]) -> f64 {
        let x = self.prepare(row);
        let p = match &self.params {
            ModelParams::Logistic { weights, intercept } => {
                sigmoid(intercept + weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>())
            }
            ModelParams::RandomForest { trees } => {
                let votes = trees.iter().filter(|t| t.predict(&x) == 1).count();
                votes as f64 / trees.len() as f64
            }
            ModelParams::DecisionTree { tree } => tree.predict_proba(&x),
        };
        p.clamp(0.0, 1.0)
    }
}
