//! z-score standardization, PCA projection and per-target least squares.

mod artifact;
mod pca;
mod pipeline;
mod regression;
mod split;
mod standardize;

pub use artifact::{load_pipeline, parse_pipeline, save_pipeline, serialize_pipeline, ARTIFACT_VERSION};
pub use pca::{fit_pca, PcaLoadings};
pub use pipeline::{fit_pipeline, FittedPipeline, Method, PipelineSpec, Prediction, Scope};
pub use regression::{fit_regression, LinearFit, RegressionModel};
pub use split::{split_indices, split_train_test, Split};
pub use standardize::{fit_standardizer, Standardizer};
