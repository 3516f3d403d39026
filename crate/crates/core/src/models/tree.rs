use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::classifier::{Learner, ModelParams, TrainedClassifier};
use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeHyper {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    #[serde(default)]
    pub max_features: Option<usize>,
}

impl Default for TreeHyper {
    fn default() -> Self {
        TreeHyper { max_depth: 12, min_leaf: 2, max_features: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf { prob: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART classification tree (Gini impurity) stored as a node arena with the
/// root at index 0. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    /// Unnormalized impurity decrease per feature, weighted by node size.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub importances: Vec<f64>,
}

fn gini(ones: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = ones as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    data: &'a Dataset,
    hyper: TreeHyper,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    importances: Vec<f64>,
    features: Vec<usize>,
}

impl Builder<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let ones = idx.iter().filter(|&&i| self.data.labels()[i] == 1).count();
        let prob = if idx.is_empty() { 0.0 } else { ones as f64 / idx.len() as f64 };
        self.nodes.push(Node::Leaf { prob });
        self.nodes.len() - 1
    }

    /// Best (feature, threshold, impurity decrease) over a random feature subset.
    fn best_split(&mut self, idx: &[usize]) -> Option<(usize, f64, f64)> {
        let n = idx.len();
        let labels = self.data.labels();
        let total_ones = idx.iter().filter(|&&i| labels[i] == 1).count();
        let parent = gini(total_ones, n);
        let k = self.hyper.max_features.unwrap_or(self.features.len()).clamp(1, self.features.len());
        self.features.shuffle(&mut self.rng);
        let mut candidates: Vec<usize> = self.features[..k].to_vec();
        // Fixed scan order so ties resolve to the lowest feature index.
        candidates.sort_unstable();

        let mut best: Option<(usize, f64, f64)> = None;
        let mut order: Vec<(f64, u8)> = Vec::with_capacity(n);
        for &f in &candidates {
            order.clear();
            order.extend(idx.iter().map(|&i| (self.data.rows()[i][f], labels[i])));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_ones = 0usize;
            for split in 1..n {
                left_ones += usize::from(order[split - 1].1);
                if order[split - 1].0 == order[split].0 {
                    continue;
                }
                if split < self.hyper.min_leaf || n - split < self.hyper.min_leaf {
                    continue;
                }
                let right_ones = total_ones - left_ones;
                let weighted = (split as f64 * gini(left_ones, split)
                    + (n - split) as f64 * gini(right_ones, n - split))
                    / n as f64;
                let gain = parent - weighted;
                if gain > 1e-12 && best.is_none_or(|(_, _, g)| gain > g) {
                    let threshold = 0.5 * (order[split - 1].0 + order[split].0);
                    best = Some((f, threshold, gain));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let labels = self.data.labels();
        let ones = idx.iter().filter(|&&i| labels[i] == 1).count();
        let pure = ones == 0 || ones == idx.len();
        if pure || depth >= self.hyper.max_depth || idx.len() < 2 * self.hyper.min_leaf.max(1) {
            return self.leaf(&idx);
        }
        let Some((feature, threshold, gain)) = self.best_split(&idx) else {
            return self.leaf(&idx);
        };
        self.importances[feature] += gain * idx.len() as f64;
        let (left, right): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.data.rows()[i][feature] <= threshold);
        let at = self.nodes.len();
        self.nodes.push(Node::Split { feature, threshold, left: 0, right: 0 });
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[at] = Node::Split { feature, threshold, left: l, right: r };
        at
    }
}

impl DecisionTree {
    /// Fits a tree on the rows listed in `sample` (duplicates allowed, as
    /// produced by bootstrapping).
    pub fn fit_indices(data: &Dataset, sample: Vec<usize>, hyper: TreeHyper, seed: u64) -> Self {
        let mut b = Builder {
            data,
            hyper,
            rng: ChaCha8Rng::seed_from_u64(seed),
            nodes: Vec::new(),
            importances: alloc::vec![0.0; data.width()],
            features: (0..data.width()).collect(),
        };
        if data.width() == 0 || sample.is_empty() {
            b.leaf(&sample);
        } else {
            b.grow(sample, 0);
        }
        DecisionTree { nodes: b.nodes, importances: b.importances }
    }

    pub fn fit(data: &Dataset, hyper: TreeHyper, seed: u64) -> Self {
        DecisionTree::fit_indices(data, (0..data.len()).collect(), hyper, seed)
    }

    fn leaf_prob(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { prob } => return prob,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        self.leaf_prob(row)
    }

    /// Majority vote of the reached leaf; ties vote 1.
    pub fn predict(&self, row: &[f64]) -> u8 {
        u8::from(self.leaf_prob(row) >= 0.5)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }

    pub(crate) fn validate(&self, width: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::invalid("tree has no nodes"));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            match *n {
                Node::Leaf { prob } if !(0.0..=1.0).contains(&prob) => {
                    return Err(Error::invalid("tree leaf probability outside [0,1]"));
                }
                Node::Split { feature, left, right, threshold } => {
                    if feature >= width
                        || left <= i
                        || right <= i
                        || left >= self.nodes.len()
                        || right >= self.nodes.len()
                        || !threshold.is_finite()
                    {
                        return Err(Error::invalid(alloc::format!("malformed tree node {i}")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// A single CART tree over all features, the forest's building block and a
/// baseline in its own right.
#[derive(Debug, Clone, Default)]
pub struct TreeLearner {
    pub hyper: TreeHyper,
}

impl Learner for TreeLearner {
    type Model = TrainedClassifier;

    fn fit(&self, data: &Dataset, seed: u64) -> Result<TrainedClassifier> {
        if data.is_empty() {
            return Err(Error::invalid("cannot fit a tree on an empty dataset"));
        }
        Ok(TrainedClassifier {
            feature_names: data.feature_names().to_vec(),
            scaler: None,
            params: ModelParams::DecisionTree { tree: DecisionTree::fit(data, self.hyper, seed) },
        })
    }
}
