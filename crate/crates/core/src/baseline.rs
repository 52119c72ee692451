//! Gaussian-kernel AUC features over the post-meal glucose window, fitted with
//! the same standardize + least-squares backend (no PCA).

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{Column, FeatureMatrix, RowKey};
use crate::model::{fit_pipeline, FittedPipeline, Method, PipelineSpec};
use crate::preprocess::{MealWindow, SignalName};

pub const KERNEL_COUNT: usize = 5;

/// Equidistant Gaussian kernels over one post-meal window.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBank {
    /// Seconds from the first sample of the window.
    pub centers: Vec<f64>,
    /// Kernel standard deviation in seconds.
    pub bandwidth: f64,
    /// Samples per window.
    pub len: usize,
    pub rate: f64,
}

impl KernelBank {
    /// Kernels for a window of `len` samples at `rate` Hz. The sample span
    /// `T = (len - 1) / rate` is cut into `count` equal parts with a kernel at the
    /// middle of each; the bandwidth defaults to half the spacing.
    pub fn new(len: usize, rate: f64, count: usize, bandwidth_s: Option<f64>) -> Result<Self> {
        if len < 2 || !(rate > 0.0 && rate.is_finite()) || count == 0 {
            return Err(Error::Config("kernel bank needs at least 2 samples, a positive rate and one kernel".into()));
        }
        let span = (len - 1) as f64 / rate;
        let spacing = span / count as f64;
        let bandwidth = bandwidth_s.unwrap_or(spacing / 2.0);
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::Config(format!("kernel bandwidth must be positive, got {bandwidth}")));
        }
        Ok(KernelBank {
            centers: (0..count).map(|m| (m as f64 + 0.5) * spacing).collect(),
            bandwidth,
            len,
            rate,
        })
    }

    /// Five kernels over a `horizon_min`-minute window at `rate` Hz, bandwidth in minutes.
    pub fn for_window(horizon_min: f64, rate: f64, bandwidth_min: Option<f64>) -> Result<Self> {
        let len = (horizon_min * 60.0 * rate).round() as usize;
        Self::new(len, rate, KERNEL_COUNT, bandwidth_min.map(|b| b * 60.0))
    }

    pub fn columns(&self) -> Vec<Column> {
        (1..=self.centers.len())
            .map(|m| Column::new(SignalName::BglPost, format!("AUC_K{m}")))
            .collect()
    }

    /// `len x count` matrix of trapezoid weight x kernel value x sample spacing;
    /// the features of a segment `g` are `weight_matrix()^T g`.
    pub fn weight_matrix(&self) -> DMatrix<f64> {
        let dt = 1.0 / self.rate;
        let b2 = 2.0 * self.bandwidth * self.bandwidth;
        DMatrix::from_fn(self.len, self.centers.len(), |i, m| {
            let t = i as f64 * dt;
            let trap = if i == 0 || i + 1 == self.len { 0.5 } else { 1.0 };
            let d = t - self.centers[m];
            trap * dt * (-d * d / b2).exp()
        })
    }
}

/// Kernel-weighted trapezoidal AUC of a glucose segment, one value per kernel.
pub fn gaussian_auc_features(segment: &[f64], bank: &KernelBank) -> Result<Vec<f64>> {
    if segment.len() != bank.len {
        return Err(Error::Dimension(format!("kernel bank expects {} samples, segment has {}", bank.len, segment.len())));
    }
    let dt = 1.0 / bank.rate;
    let b2 = 2.0 * bank.bandwidth * bank.bandwidth;
    let last = segment.len() - 1;
    Ok(bank
        .centers
        .iter()
        .map(|&c| {
            segment
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let d = i as f64 * dt - c;
                    let trap = if i == 0 || i == last { 0.5 } else { 1.0 };
                    trap * g * (-d * d / b2).exp()
                })
                .sum::<f64>()
                * dt
        })
        .collect())
}

/// One row of kernel AUCs of the post-meal glucose segment per window.
pub fn huo_feature_matrix(windows: &[MealWindow], bank: &KernelBank) -> Result<FeatureMatrix> {
    let columns = bank.columns();
    let rows = windows
        .par_iter()
        .map(|w| {
            let seg = w
                .segment(SignalName::BglPost)
                .ok_or_else(|| Error::Config("kernel baseline needs the BGL_POST signal".into()))?;
            gaussian_auc_features(seg, bank)
        })
        .collect::<Result<Vec<_>>>()?;
    let keys = windows
        .iter()
        .map(|w| RowKey {
            subject_id: w.meal.subject_id.clone(),
            timestamp: w.meal.timestamp,
        })
        .collect();
    let targets = windows.iter().map(|w| w.meal.macros).collect();
    FeatureMatrix::from_rows(keys, columns, rows, targets)
}

/// Per-target least squares on the standardized kernel features.
pub fn fit_baseline(train: &FeatureMatrix, spec: &PipelineSpec) -> Result<FittedPipeline> {
    let spec = PipelineSpec {
        method: Method::Huo,
        ..spec.clone()
    };
    fit_pipeline(train, &spec)
}
