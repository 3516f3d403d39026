use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::classifier::{Learner, ModelParams, TrainedClassifier};
use super::tree::{DecisionTree, TreeHyper};
use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestHyper {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestHyper {
    fn default() -> Self {
        ForestHyper { n_trees: 100, max_depth: 12, min_leaf: 2, seed: 0 }
    }
}

/// Bagged CART trees with `floor(sqrt(d))` candidate features per split.
/// Every tree gets its own seed drawn from the forest seed, so the result
/// depends only on `hyper` and the data.
///
/// Single-class training data is accepted; every tree then votes that class
/// and the probability is constant 0 or 1.
pub fn train_random_forest(data: &Dataset, hyper: &ForestHyper) -> Result<TrainedClassifier> {
    if data.is_empty() {
        return Err(Error::invalid("cannot fit a forest on an empty dataset"));
    }
    if hyper.n_trees == 0 {
        return Err(Error::invalid("forest needs at least one tree"));
    }
    let n = data.len();
    let max_features = (libm::sqrt(data.width() as f64) as usize).max(1);
    let tree_hyper = TreeHyper {
        max_depth: hyper.max_depth,
        min_leaf: hyper.min_leaf,
        max_features: Some(max_features),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut trees = Vec::with_capacity(hyper.n_trees);
    for _ in 0..hyper.n_trees {
        let tree_seed: u64 = rng.gen();
        let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        trees.push(DecisionTree::fit_indices(data, sample, tree_hyper, tree_seed));
    }
    Ok(TrainedClassifier {
        feature_names: data.feature_names().to_vec(),
        scaler: None,
        params: ModelParams::RandomForest { trees },
    })
}

#[derive(Debug, Clone, Default)]
pub struct ForestLearner {
    pub hyper: ForestHyper,
}

impl Learner for ForestLearner {
    type Model = TrainedClassifier;

    /// The fold seed replaces the configured forest seed.
    fn fit(&self, data: &Dataset, seed: u64) -> Result<TrainedClassifier> {
        train_random_forest(data, &ForestHyper { seed, ..self.hyper })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ProbabilisticClassifier;

    fn blobs(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let y = (i % 2) as u8;
            let cx = if y == 1 { 3.0 } else { -3.0 };
            rows.push(alloc::vec![cx + rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]);
            labels.push(y);
        }
        Dataset::unnamed(rows, labels).unwrap()
    }

    #[test]
    fn unanimous_when_single_class() {
        let d = Dataset::unnamed(alloc::vec![alloc::vec![0.0], alloc::vec![1.0], alloc::vec![2.0]], alloc::vec![1, 1, 1])
            .unwrap();
        let m = train_random_forest(&d, &ForestHyper { n_trees: 10, ..Default::default() }).unwrap();
        for x in [-5.0, 0.5, 9.0] {
            assert_eq!(m.predict_proba(&[x]), 1.0);
        }
    }

    #[test]
    fn seeded_determinism() {
        let d = blobs(60, 1);
        let h = ForestHyper { n_trees: 15, seed: 42, ..Default::default() };
        let a = train_random_forest(&d, &h).unwrap();
        let b = train_random_forest(&d, &h).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn probability_is_vote_fraction() {
        let d = blobs(80, 2);
        let m = train_random_forest(&d, &ForestHyper { n_trees: 7, ..Default::default() }).unwrap();
        for x in [-4.0, -0.2, 0.0, 0.3, 4.0] {
            let row = [x, 0.1];
            assert_eq!(m.predict_proba(&row), m.votes(&row).unwrap() as f64 / 7.0);
        }
    }
}
