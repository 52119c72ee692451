use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::svd;

/// Top-K principal directions of standardized training features.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaLoadings {
    /// `p x K`; column `k` is the loading vector of component `k`.
    pub w: DMatrix<f64>,
    /// `s_k^2 / (n - 1)`, non-increasing.
    pub explained_variance: Vec<f64>,
}

/// Right singular vectors of the (column-centred) scaled matrix with the K
/// largest singular values. Each loading vector is signed so that its
/// largest-magnitude entry is positive (first such entry on ties).
pub fn fit_pca(x_scaled: &DMatrix<f64>, components: usize) -> Result<PcaLoadings> {
    let (n, p) = x_scaled.shape();
    if components == 0 {
        return Err(Error::Config("PCA needs at least one component".into()));
    }
    if n < components {
        return Err(Error::Validation(format!("PCA with {components} components needs at least {components} rows, got {n}")));
    }
    if p < components {
        return Err(Error::Validation(format!("PCA with {components} components needs at least {components} columns, got {p}")));
    }
    let dec = svd(x_scaled)?;
    let mut w = dec.v.columns(0, components).into_owned();
    for k in 0..components {
        let mut col = w.column_mut(k);
        let pivot = col
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) })
            .0;
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
    }
    let denom = (n.max(2) - 1) as f64;
    let explained_variance = (0..components)
        .map(|k| dec.singular_values.get(k).copied().unwrap_or(0.0).powi(2) / denom)
        .collect();
    Ok(PcaLoadings { w, explained_variance })
}

impl PcaLoadings {
    pub fn components(&self) -> usize {
        self.w.ncols()
    }

    pub fn nfeatures(&self) -> usize {
        self.w.nrows()
    }

    /// Scores `Z = X_scaled W`.
    pub fn transform(&self, x_scaled: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x_scaled.ncols() != self.nfeatures() {
            return Err(Error::Dimension(format!("loadings have {} rows, data has {} columns", self.nfeatures(), x_scaled.ncols())));
        }
        Ok(x_scaled * &self.w)
    }
}
