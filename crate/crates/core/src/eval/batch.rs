use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::DatasetKind;
use crate::error::{Error, Result};

/// Shuffles `0..n` with `seed`, then cuts consecutive chunks of `k`; the
/// last chunk may be shorter.
pub fn batch_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::Config("batch size k must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(order.chunks(k).map(<[usize]>::to_vec).collect())
}

pub fn group_into_batches<T>(items: &[T], k: usize, seed: u64) -> Result<Vec<Vec<&T>>> {
    Ok(batch_indices(items.len(), k, seed)?
        .into_iter()
        .map(|group| group.into_iter().map(|i| &items[i]).collect())
        .collect())
}

/// Warning text when `k` is not one of the benchmark's standard sizes.
pub fn check_batch_size(k: usize, kind: DatasetKind) -> Option<String> {
    let standard = kind.standard_batch_sizes();
    (!standard.is_empty() && !standard.contains(&k)).then(|| {
        format!("k={k} is not a standard batch size for {kind:?} (expected one of {standard:?})")
    })
}
