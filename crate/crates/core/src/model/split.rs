use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub const MIN_SPLIT_ROWS: usize = 5;

/// Row indices of a train/test partition, each ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded uniform shuffle; the first `ceil(ratio * n)` shuffled rows train.
pub fn split_indices(n: usize, ratio: f64, seed: u64) -> Result<Split> {
    if n < MIN_SPLIT_ROWS {
        return Err(Error::Validation(format!("need at least {MIN_SPLIT_ROWS} rows to split, got {n}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let n_train = ((ratio * n as f64) - 1e-9).ceil() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::Validation(format!("split of {n} rows at ratio {ratio} leaves an empty side")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

pub fn split_train_test(rows: &FeatureMatrix, ratio: f64, seed: u64) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let split = split_indices(rows.nrows(), ratio, seed)?;
    Ok((rows.select_rows(&split.train), rows.select_rows(&split.test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_rule() {
        let s = split_indices(15, 0.8, 7).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (12, 3));
        let s = split_indices(180, 0.8, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (144, 36));
        let s = split_indices(7, 0.8, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (6, 1));
    }

    #[test]
    fn deterministic_partition() {
        assert_eq!(split_indices(40, 0.8, 99).unwrap(), split_indices(40, 0.8, 99).unwrap());
        assert_ne!(split_indices(40, 0.8, 99).unwrap(), split_indices(40, 0.8, 100).unwrap());
    }

    #[test]
    fn partition_covers_all_rows_once() {
        let s = split_indices(33, 0.8, 5).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..33).collect::<Vec<_>>());
    }

    #[test]
    fn too_few_rows_or_bad_ratio() {
        assert!(split_indices(4, 0.8, 0).is_err());
        assert!(split_indices(10, 1.0, 0).is_err());
        assert!(split_indices(10, 0.0, 0).is_err());
    }
}
