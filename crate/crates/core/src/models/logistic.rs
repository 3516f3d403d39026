use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::classifier::{Learner, ModelParams, TrainedClassifier};
use super::{Dataset, Scaler};
use crate::error::{Error, Result};

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 penalty on the weights (not the intercept).
    pub l2: f64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        LogisticHyper { learning_rate: 0.1, epochs: 500, l2: 1e-3 }
    }
}

/// Mean log-loss plus `l2 / 2 * |w|^2`.
pub(crate) fn regularized_loss(data: &Dataset, w: &[f64], b: f64, l2: f64) -> f64 {
    let n = data.len() as f64;
    let mut loss = 0.0;
    for (row, &y) in data.rows().iter().zip(data.labels()) {
        let z = b + row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>();
        // log(1 + e^z) - y z, written to avoid overflow
        let softplus = if z > 0.0 { z + libm::log1p(libm::exp(-z)) } else { libm::log1p(libm::exp(z)) };
        loss += softplus - f64::from(y) * z;
    }
    loss / n + 0.5 * l2 * w.iter().map(|w| w * w).sum::<f64>()
}

/// Full-batch gradient descent on the regularized log-loss. Returns the
/// model and the loss recorded before each epoch plus the final loss.
pub fn train_logistic_with_history(
    data: &Dataset,
    hyper: &LogisticHyper,
) -> Result<(TrainedClassifier, Vec<f64>)> {
    let (zeros, ones) = data.class_counts();
    if zeros == 0 || ones == 0 {
        return Err(Error::SingleClass(alloc::format!(
            "logistic regression needs both classes, got {zeros} controls and {ones} dementia rows"
        )));
    }
    let n = data.len() as f64;
    let d = data.width();
    let mut w = alloc::vec![0.0; d];
    let mut b = 0.0;
    let mut history = Vec::with_capacity(hyper.epochs + 1);
    let mut grad = alloc::vec![0.0; d];
    for _ in 0..hyper.epochs {
        history.push(regularized_loss(data, &w, b, hyper.l2));
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (row, &y) in data.rows().iter().zip(data.labels()) {
            let z = b + row.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>();
            let err = super::sigmoid(z) - f64::from(y);
            for (g, x) in grad.iter_mut().zip(row) {
                *g += err * x;
            }
            grad_b += err;
        }
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi -= hyper.learning_rate * (g / n + hyper.l2 * *wi);
        }
        b -= hyper.learning_rate * grad_b / n;
    }
    history.push(regularized_loss(data, &w, b, hyper.l2));
    let model = TrainedClassifier {
        feature_names: data.feature_names().to_vec(),
        scaler: None,
        params: ModelParams::Logistic { weights: w, intercept: b },
    };
    Ok((model, history))
}

pub fn train_logistic(data: &Dataset, hyper: &LogisticHyper) -> Result<TrainedClassifier> {
    train_logistic_with_history(data, hyper).map(|(m, _)| m)
}

/// Logistic regression learner. With `standardize`, a scaler is fitted on
/// each training set and stored in the model.
#[derive(Debug, Clone, Default)]
pub struct LogisticLearner {
    pub hyper: LogisticHyper,
    pub standardize: bool,
}

impl Learner for LogisticLearner {
    type Model = TrainedClassifier;

    fn fit(&self, data: &Dataset, _seed: u64) -> Result<TrainedClassifier> {
        if self.standardize {
            let scaler = Scaler::fit(data);
            let mut model = train_logistic(&scaler.transform(data), &self.hyper)?;
            model.scaler = Some(scaler);
            Ok(model)
        } else {
            train_logistic(data, &self.hyper)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ProbabilisticClassifier;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs_1d(n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let y = (i % 2) as u8;
            let centre = if y == 1 { 1.0 } else { -1.0 };
            rows.push(alloc::vec![centre + rng.gen_range(-0.8..0.8)]);
            labels.push(y);
        }
        Dataset::unnamed(rows, labels).unwrap()
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(1.238682) - 0.775_334_5).abs() < 1e-6);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((sigmoid(-3.0) - (1.0 - sigmoid(3.0))).abs() < 1e-15);
    }

    #[test]
    fn separating_direction_is_positive() {
        let m = train_logistic(&blobs_1d(40), &LogisticHyper::default()).unwrap();
        let ModelParams::Logistic { weights, .. } = &m.params else { unreachable!() };
        assert!(weights[0] > 0.0);
        assert!(m.predict_proba(&[2.0]) > 0.5 && m.predict_proba(&[-2.0]) < 0.5);
    }

    #[test]
    fn duplication_leaves_decision_function_unchanged() {
        let d = blobs_1d(30);
        let idx: Vec<usize> = (0..d.len()).chain(0..d.len()).collect();
        let dup = d.subset(&idx);
        let a = train_logistic(&d, &LogisticHyper::default()).unwrap();
        let b = train_logistic(&dup, &LogisticHyper::default()).unwrap();
        for x in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            assert!((a.predict_proba(&[x]) - b.predict_proba(&[x])).abs() < 1e-6);
        }
    }

    #[test]
    fn loss_is_non_increasing() {
        let (_, hist) = train_logistic_with_history(&blobs_1d(50), &LogisticHyper::default()).unwrap();
        for w in hist.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let d = Dataset::unnamed(alloc::vec![alloc::vec![1.0], alloc::vec![2.0]], alloc::vec![1, 1]).unwrap();
        assert!(matches!(train_logistic(&d, &LogisticHyper::default()), Err(Error::SingleClass(_))));
    }
}
