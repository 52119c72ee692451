//! Deterministic inputs shared by the benchmarks.

use mealmeter_core::features::{FeatureMatrix, RowKey};
use mealmeter_core::preprocess::{PreprocessConfig, SignalName};
use mealmeter_core::signal::{ChannelKind, Macros, TimeSeries};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Samples in one 90-minute segment at the default 8 Hz.
pub fn window_len() -> usize {
    PreprocessConfig::default().window_len()
}

/// A noisy sinusoid of `n` samples.
pub fn segment(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| 80.0 + 10.0 * (i as f64 / 500.0).sin() + rng.random_range(-1.0..1.0))
        .collect()
}

/// A 32 Hz accelerometer-like channel covering `seconds`.
pub fn series_32hz(seconds: f64, seed: u64) -> TimeSeries {
    let n = (seconds * 32.0) as usize;
    TimeSeries::new(ChannelKind::AccX, 1.7e9, 32.0, segment(n, seed)).unwrap()
}

pub fn random_matrix(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0))
}

/// A feature matrix shaped like the default synthetic dataset: 180 rows, 6 signals x 16 features.
pub fn study_matrix(seed: u64) -> FeatureMatrix {
    let columns = FeatureMatrix::standard_columns(&SignalName::DEFAULT);
    let values = random_matrix(180, columns.len(), seed);
    let targets = (0..180)
        .map(|i| Macros::new(50.0 + 20.0 * values[(i, 0)], 20.0 + 5.0 * values[(i, 1)], 15.0 + 5.0 * values[(i, 2)]))
        .collect();
    let keys = (0..180)
        .map(|i| RowKey {
            subject_id: format!("S{:02}", 1 + i / 15),
            timestamp: 1.7e9 + 7200.0 * i as f64,
        })
        .collect();
    FeatureMatrix::new(keys, columns, values, targets).unwrap()
}
