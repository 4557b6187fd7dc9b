//! Stratified fold assignment.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Fold id of every sample. Each class is shuffled with the seed and dealt
/// round-robin, so every fold holds members of both classes.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds}")));
    }
    let mut assignment = vec![0; labels.len()];
    let mut rng = rng_from_seed(seed);
    let mut offset = 0;
    for class in 0..=1u8 {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::SingleClass(format!(
                "class {class} has {} samples, fewer than {folds} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (k, &i) in members.iter().enumerate() {
            assignment[i] = (k + offset) % folds;
        }
        offset += members.len();
    }
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::NonBinaryLabel(bad));
    }
    Ok(assignment)
}

/// `(train, validation)` index lists for fold `k`.
pub fn fold_indices(assignment: &[usize], k: usize) -> (Vec<usize>, Vec<usize>) {
    (0..assignment.len()).partition(|&i| assignment[i] != k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<u8> = (0..50).map(|i| (i % 2) as u8).collect();
        let a = stratified_folds(&labels, 5, 3).unwrap();
        for k in 0..5 {
            let (_, val) = fold_indices(&a, k);
            let pos = val.iter().filter(|&&i| labels[i] == 1).count();
            assert_eq!(val.len(), 10);
            assert_eq!(pos, 5);
        }
        assert_eq!(a, stratified_folds(&labels, 5, 3).unwrap());
    }

    #[test]
    fn too_few_per_class() {
        let labels = [0, 0, 0, 1];
        assert!(stratified_folds(&labels, 2, 0).is_err());
        assert!(stratified_folds(&[0, 1], 1, 0).is_err());
    }
}
