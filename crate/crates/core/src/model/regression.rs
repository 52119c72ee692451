use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::lstsq;
use crate::signal::Target;

/// `y = intercept + coefficients . z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearFit {
    pub fn predict_row(&self, z: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(z).map(|(b, x)| b * x).sum::<f64>()
    }
}

/// Least squares on the design `[1 | Z]`, solved through its SVD; rank-deficient
/// designs get the minimum-norm solution.
pub fn fit_regression(z: &DMatrix<f64>, y: &[f64]) -> Result<LinearFit> {
    let (n, k) = z.shape();
    if y.len() != n {
        return Err(Error::Dimension(format!("{n} score rows but {} targets", y.len())));
    }
    if n <= k + 1 {
        return Err(Error::Validation(format!("regression on {k} predictors needs more than {} rows, got {n}", k + 1)));
    }
    let design = DMatrix::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { z[(i, j - 1)] });
    let beta = lstsq(&design, &DVector::from_column_slice(y))?;
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Numerical("regression produced non-finite coefficients".into()));
    }
    Ok(LinearFit {
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
    })
}

/// One linear model per macronutrient, all on the same scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    pub fits: [LinearFit; 3],
}

impl RegressionModel {
    pub fn fit(z: &DMatrix<f64>, targets: &[[f64; 3]]) -> Result<Self> {
        let column = |t: usize| targets.iter().map(|row| row[t]).collect::<Vec<_>>();
        Ok(RegressionModel {
            fits: [fit_regression(z, &column(0))?, fit_regression(z, &column(1))?, fit_regression(z, &column(2))?],
        })
    }

    pub fn get(&self, target: Target) -> &LinearFit {
        &self.fits[target.index()]
    }
}
