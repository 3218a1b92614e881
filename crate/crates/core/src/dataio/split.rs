use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use crate::error::{Error, Result};

/// Deterministic shuffled permutation of `0..n` under `seed`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Shuffle under `seed` and cut into `round(n * (1 - test_fraction))` train
/// records and the remainder as test records.
pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = dataset.len();
    let n_train = (n as f64 * (1.0 - test_fraction)).round() as usize;
    let perm = permutation(n, seed);
    let pick = |ids: &[usize]| {
        Dataset::new(
            dataset.schema.clone(),
            ids.iter().map(|&i| dataset.records[i].clone()).collect(),
        )
    };
    let train = pick(&perm[..n_train])?;
    let test = pick(&perm[n_train..])?;
    Ok((train, test))
}
