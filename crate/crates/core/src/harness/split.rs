use rand::seq::SliceRandom;

use super::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Stratified `(train, test)` index lists, each in ascending order.
pub fn split_indices(labels: &[u8], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..=1u8 {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < 2 {
            return Err(Error::SingleClass(format!(
                "class {class} has {} samples; a split needs at least 2",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let n_test = ((members.len() as f64 * test_fraction).round() as usize).clamp(1, members.len() - 1);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::NonBinaryLabel(bad));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(&dataset.labels(), test_fraction, seed)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}
