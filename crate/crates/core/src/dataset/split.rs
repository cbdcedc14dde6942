use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub n_train: usize,
    pub seed: u64,
    /// Require exactly `n_train / 2` points of each class. When unset the
    /// per-class counts may differ by one, with the extra point going to
    /// the larger class.
    pub per_class_balance: bool,
}

/// Sorted train and test index sets; together they partition `0..N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn split_indices(data: &Dataset, spec: &SplitSpec) -> Result<Split> {
    let n = data.len();
    if spec.n_train == 0 || spec.n_train > n {
        return Err(Error::invalid(format!(
            "n_train must be in 1..={n}, got {}",
            spec.n_train
        )));
    }
    if spec.per_class_balance && !spec.n_train.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "balanced split needs an even n_train, got {}",
            spec.n_train
        )));
    }

    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| data.labels()[i] == 1);
    let half = spec.n_train / 2;
    let (take_pos, take_neg) = if spec.n_train.is_multiple_of(2) {
        (half, half)
    } else if pos.len() >= neg.len() {
        (half + 1, half)
    } else {
        (half, half + 1)
    };
    if pos.len() < take_pos || neg.len() < take_neg {
        return Err(Error::invalid(format!(
            "need {take_pos} positive and {take_neg} negative training points, have {} and {}",
            pos.len(),
            neg.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut train: Vec<usize> = pos[..take_pos]
        .iter()
        .chain(&neg[..take_neg])
        .copied()
        .collect();
    train.sort_unstable();

    let mut in_train = vec![false; n];
    for &i in &train {
        in_train[i] = true;
    }
    let test = (0..n).filter(|&i| !in_train[i]).collect();
    Ok(Split { train, test })
}

/// Class-stratified random split. The test set is every point not chosen
/// for training and may be empty.
pub fn split_stratified(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Option<Dataset>)> {
    let split = split_indices(data, spec)?;
    let train = data.subset(&split.train)?;
    let test = if split.test.is_empty() {
        None
    } else {
        Some(data.subset(&split.test)?)
    };
    Ok((train, test))
}
