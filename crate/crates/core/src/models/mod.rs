//! From-scratch binary classifiers, cross-validation, metrics and feature
//! selection.
//!
//! Labels are `1` for dementia and `0` for control. All learners are
//! deterministic given their seed.

mod classifier;
mod cv;
mod dataset;
mod forest;
mod logistic;
mod metrics;
mod scaler;
mod selection;
mod tree;

pub use classifier::{ClassifierKind, Learner, ModelParams, ProbabilisticClassifier, TrainedClassifier};
pub use cv::{cross_validate, stratified_folds};
pub use dataset::Dataset;
pub use forest::{train_random_forest, ForestHyper, ForestLearner};
pub use logistic::{sigmoid, train_logistic, LogisticHyper, LogisticLearner};
pub use metrics::{Confusion, MetricsReport};
pub use scaler::Scaler;
pub use selection::{feature_importances, select_top_k_features};
pub use tree::{DecisionTree, TreeHyper, TreeLearner};
