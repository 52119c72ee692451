//! Error metrics, contribution decomposition and report export.

mod contributions;
mod metrics;
mod report;
mod svg;

pub use contributions::{feature_contributions, signal_contributions, ContributionReport};
pub use metrics::{mae, pearson, rmsre, rmsre_excluding_zeros, Correlation};
pub use report::{
    comparison_csv, contributions_csv, evaluate, export_report, feature_contributions_csv, metrics_per_subject_csv,
    metrics_pooled_csv, render_report, scatter_csv, write_files, EvalReport, ExportOptions, MethodResult, ScatterPoint, TargetMetrics,
};
