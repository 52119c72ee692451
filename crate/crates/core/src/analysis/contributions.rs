use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::features::Column;
use crate::model::FittedPipeline;
use crate::preprocess::SignalName;
use crate::signal::Target;

/// `gamma = W beta`: the weight of each scaled feature in one target's linear model.
pub fn feature_contributions(w: &DMatrix<f64>, beta: &[f64]) -> Result<Vec<f64>> {
    if w.ncols() != beta.len() {
        return Err(Error::Dimension(format!("loadings have {} components, coefficients {}", w.ncols(), beta.len())));
    }
    Ok((0..w.nrows()).map(|i| (0..w.ncols()).map(|k| w[(i, k)] * beta[k]).sum()).collect())
}

/// Sums `gamma` over the features of each signal, in the order of `signals`.
pub fn signal_contributions(gamma: &[f64], columns: &[Column], signals: &[SignalName]) -> Result<Vec<f64>> {
    if gamma.len() != columns.len() {
        return Err(Error::Dimension(format!("{} contributions for {} columns", gamma.len(), columns.len())));
    }
    let mut out = vec![0.0; signals.len()];
    for (g, c) in gamma.iter().zip(columns) {
        let j = signals
            .iter()
            .position(|s| *s == c.signal)
            .ok_or_else(|| Error::Schema(format!("column {} belongs to no configured signal", c.name())))?;
        out[j] += g;
    }
    Ok(out)
}

/// Feature-level and signal-level contributions of one model (or an average of models).
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionReport {
    /// Which model the numbers describe: `pooled`, a subject id, or `per-subject-mean`.
    pub model: String,
    pub columns: Vec<Column>,
    pub signals: Vec<SignalName>,
    /// Per target, one value per column.
    pub gamma: [Vec<f64>; 3],
    /// Per target, one value per signal.
    pub signal_gamma: [Vec<f64>; 3],
}

impl ContributionReport {
    pub fn from_pipeline(p: &FittedPipeline, model: impl Into<String>) -> Result<Self> {
        let w = p.loadings();
        let mut signals: Vec<SignalName> = Vec::new();
        for c in &p.columns {
            if !signals.contains(&c.signal) {
                signals.push(c.signal);
            }
        }
        let mut gamma: [Vec<f64>; 3] = Default::default();
        let mut signal_gamma: [Vec<f64>; 3] = Default::default();
        for t in Target::ALL {
            let g = feature_contributions(&w, &p.regression.get(t).coefficients)?;
            signal_gamma[t.index()] = signal_contributions(&g, &p.columns, &signals)?;
            gamma[t.index()] = g;
        }
        Ok(ContributionReport {
            model: model.into(),
            columns: p.columns.clone(),
            signals,
            gamma,
            signal_gamma,
        })
    }

    /// Element-wise mean of reports sharing one schema.
    pub fn mean(reports: &[ContributionReport], model: impl Into<String>) -> Result<Self> {
        let first = reports.first().ok_or_else(|| Error::Validation("no contribution reports to average".into()))?;
        if reports.iter().any(|r| r.columns != first.columns || r.signals != first.signals) {
            return Err(Error::Schema("cannot average contributions over different schemas".into()));
        }
        let n = reports.len() as f64;
        let avg = |pick: &dyn Fn(&ContributionReport) -> &Vec<f64>| -> Vec<f64> {
            let mut out = vec![0.0; pick(first).len()];
            for r in reports {
                for (o, v) in out.iter_mut().zip(pick(r)) {
                    *o += v;
                }
            }
            out.iter().map(|v| v / n).collect()
        };
        Ok(ContributionReport {
            model: model.into(),
            columns: first.columns.clone(),
            signals: first.signals.clone(),
            gamma: [0, 1, 2].map(|t| avg(&|r| &r.gamma[t])),
            signal_gamma: [0, 1, 2].map(|t| avg(&|r| &r.signal_gamma[t])),
        })
    }

    pub fn signal(&self, target: Target, signal: SignalName) -> Option<f64> {
        let j = self.signals.iter().position(|s| *s == signal)?;
        Some(self.signal_gamma[target.index()][j])
    }
}
