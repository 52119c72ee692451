use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Per-column z-score parameters fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mu: Vec<f64>,
    /// Population standard deviation.
    pub sigma: Vec<f64>,
    /// Columns that were constant in training; they map to 0.
    pub constant_columns: Vec<usize>,
}

pub fn fit_standardizer(train: &DMatrix<f64>) -> Result<Standardizer> {
    let n = train.nrows();
    if n == 0 {
        return Err(Error::Validation("cannot standardize an empty training set".into()));
    }
    let mut s = Standardizer {
        mu: Vec::with_capacity(train.ncols()),
        sigma: Vec::with_capacity(train.ncols()),
        constant_columns: Vec::new(),
    };
    for (j, col) in train.column_iter().enumerate() {
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            s.mu.push(first);
            s.sigma.push(0.0);
            s.constant_columns.push(j);
            continue;
        }
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        s.mu.push(mean);
        s.sigma.push(var.sqrt());
    }
    Ok(s)
}

impl Standardizer {
    pub fn ncols(&self) -> usize {
        self.mu.len()
    }

    pub fn is_constant(&self, j: usize) -> bool {
        self.sigma[j] == 0.0
    }

    pub fn apply(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rows.ncols() != self.ncols() {
            return Err(Error::Dimension(format!("standardizer has {} columns, rows have {}", self.ncols(), rows.ncols())));
        }
        Ok(DMatrix::from_fn(rows.nrows(), rows.ncols(), |i, j| {
            if self.is_constant(j) {
                0.0
            } else {
                (rows[(i, j)] - self.mu[j]) / self.sigma[j]
            }
        }))
    }
}
