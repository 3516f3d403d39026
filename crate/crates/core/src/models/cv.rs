use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::classifier::{Learner, ProbabilisticClassifier};
use super::metrics::{Confusion, MetricsReport};
use super::Dataset;
use crate::error::{Error, Result};

/// Fold index per row. Each class is shuffled separately and dealt round
/// robin, continuing the deal across classes so fold sizes differ by at
/// most one.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    if folds > labels.len() {
        return Err(Error::invalid(alloc::format!(
            "{folds} folds requested for {} samples",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = alloc::vec![0usize; labels.len()];
    let mut next = 0usize;
    for class in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Stratified k-fold evaluation with metrics taken from the confusion
/// matrix pooled over all held-out predictions.
pub fn cross_validate<L: Learner>(
    data: &Dataset,
    learner: &L,
    folds: usize,
    seed: u64,
) -> Result<MetricsReport> {
    let assignment = stratified_folds(data.labels(), folds, seed)?;
    let mut pooled = Confusion::default();
    for fold in 0..folds {
        let train: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] != fold).collect();
        let test: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] == fold).collect();
        let model = learner.fit(&data.subset(&train), seed.wrapping_add(fold as u64))?;
        for i in test {
            pooled.record(data.labels()[i], model.predict(&data.rows()[i]));
        }
    }
    Ok(MetricsReport::from_confusion(pooled, folds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_balanced_and_stratified() {
        let labels: Vec<u8> = (0..53).map(|i| u8::from(i % 3 == 0)).collect();
        let a = stratified_folds(&labels, 10, 5).unwrap();
        let mut sizes = [0usize; 10];
        let mut ones = [0usize; 10];
        for (i, &f) in a.iter().enumerate() {
            sizes[f] += 1;
            ones[f] += usize::from(labels[i]);
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert!(ones.iter().max().unwrap() - ones.iter().min().unwrap() <= 1);
        assert_eq!(a, stratified_folds(&labels, 10, 5).unwrap());
    }

    #[test]
    fn too_many_folds() {
        assert!(stratified_folds(&[0, 1, 0], 4, 0).is_err());
        assert!(stratified_folds(&[0, 1, 0], 1, 0).is_err());
    }
}
