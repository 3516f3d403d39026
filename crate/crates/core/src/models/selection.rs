use alloc::string::String;
use alloc::vec::Vec;

use super::classifier::{ModelParams, TrainedClassifier};
use super::Dataset;
use crate::error::{Error, Result};

/// Importance per model feature: mean normalized impurity decrease for tree
/// models, `|weight|` on standardized inputs for logistic models. When a
/// logistic model has no scaler its weights are rescaled by the column
/// standard deviations of `data`.
pub fn feature_importances(model: &TrainedClassifier, data: &Dataset) -> Result<Vec<f64>> {
    let width = model.feature_names.len();
    let normalize = |v: &[f64]| -> Vec<f64> {
        let total: f64 = v.iter().sum();
        if total > 0.0 {
            v.iter().map(|x| x / total).collect()
        } else {
            alloc::vec![0.0; v.len()]
        }
    };
    match &model.params {
        ModelParams::RandomForest { trees } => {
            let mut acc = alloc::vec![0.0; width];
            for t in trees {
                for (a, v) in acc.iter_mut().zip(normalize(&t.importances)) {
                    *a += v;
                }
            }
            Ok(normalize(&acc))
        }
        ModelParams::DecisionTree { tree } => Ok(normalize(&tree.importances)),
        ModelParams::Logistic { weights, .. } => {
            if model.scaler.is_some() {
                return Ok(weights.iter().map(|w| libm::fabs(*w)).collect());
            }
            let projected = data.select_named(&model.feature_names)?;
            let stds = super::Scaler::fit(&projected).stds;
            Ok(weights.iter().zip(stds).map(|(w, s)| libm::fabs(*w) * s).collect())
        }
    }
}

/// Keeps the `k` most important features, ordered by importance. Ties keep
/// the model's feature order. Selecting every feature returns the model's
/// columns in their original order.
pub fn select_top_k_features(
    model: &TrainedClassifier,
    data: &Dataset,
    k: usize,
) -> Result<(Dataset, Vec<String>)> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if k > model.feature_names.len() {
        return Err(Error::invalid(alloc::format!(
            "k = {k} exceeds the {} model features",
            model.feature_names.len()
        )));
    }
    if k == model.feature_names.len() {
        return Ok((data.select_named(&model.feature_names)?, model.feature_names.clone()));
    }
    let imp = feature_importances(model, data)?;
    let mut ranked: Vec<usize> = (0..imp.len()).collect();
    ranked.sort_by(|&a, &b| imp[b].total_cmp(&imp[a]));
    let names: Vec<String> = ranked[..k].iter().map(|&i| model.feature_names[i].clone()).collect();
    let reduced = data.select_named(&names)?;
    Ok((reduced, names))
}
