//! Macronutrient estimation from wearable and CGM signals.
//!
//! Meal windows are cut from resampled device channels, summarized by 16
//! statistical and spectral features per signal, standardized, projected onto
//! a few principal components and regressed onto carbohydrate, protein and fat
//! grams. A Gaussian-kernel glucose AUC featurizer serves as the baseline, and a
//! simulator produces datasets with a known signal-to-macronutrient dependence.

pub mod analysis;
pub mod baseline;
pub mod error;
pub mod features;
pub mod linalg;
pub mod model;
pub mod preprocess;
pub mod signal;
pub mod synth;
pub mod workflow;

pub use analysis::{ContributionReport, Correlation, EvalReport, MethodResult, ScatterPoint};
pub use baseline::KernelBank;
pub use error::{Error, ErrorCategory, Result};
pub use features::{Column, FeatureConfig, FeatureMatrix, FeatureName, RowKey};
pub use model::{FittedPipeline, Method, PcaLoadings, PipelineSpec, Prediction, RegressionModel, Scope, Standardizer};
pub use preprocess::{MealWindow, PreprocessConfig, SignalName};
pub use signal::dataset::Dataset;
pub use signal::{ChannelKind, Macros, MealEvent, MealLabel, RecordingDay, SubjectRecord, Target, TimeSeries};
pub use synth::{GroundTruth, SynthConfig};
pub use workflow::{MethodSelection, RunConfig};
