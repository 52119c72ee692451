use std::fmt;

use crate::error::{Error, Result};

fn check_pairs(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::Dimension(format!("{} targets but {} estimates", y.len(), yhat.len())));
    }
    if y.is_empty() {
        return Err(Error::Validation("no samples to score".into()));
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pairs(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

/// Root mean squared relative error. Every target must be non-zero.
pub fn rmsre(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pairs(y, yhat)?;
    if let Some(i) = y.iter().position(|&v| v == 0.0) {
        return Err(Error::Validation(format!("relative error undefined: target {i} is 0")));
    }
    let ms = y.iter().zip(yhat).map(|(a, b)| ((a - b) / a).powi(2)).sum::<f64>() / y.len() as f64;
    Ok(ms.sqrt())
}

/// RMSRE over the rows with a non-zero target; also returns how many rows were dropped.
/// `None` when every target is zero.
pub fn rmsre_excluding_zeros(y: &[f64], yhat: &[f64]) -> Result<(Option<f64>, usize)> {
    check_pairs(y, yhat)?;
    let (ys, hs): (Vec<f64>, Vec<f64>) = y.iter().zip(yhat).filter(|(a, _)| **a != 0.0).map(|(a, b)| (*a, *b)).unzip();
    let excluded = y.len() - ys.len();
    if ys.is_empty() {
        return Ok((None, excluded));
    }
    Ok((Some(rmsre(&ys, &hs)?), excluded))
}

/// Pearson correlation, or the reason it is undefined.
#[derive(Debug, Clone, PartialEq)]
pub enum Correlation {
    Defined(f64),
    Undefined(String),
}

impl Correlation {
    pub fn value(&self) -> Option<f64> {
        match self {
            Correlation::Defined(r) => Some(*r),
            Correlation::Undefined(_) => None,
        }
    }
}

impl fmt::Display for Correlation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Correlation::Defined(r) => write!(f, "{r}"),
            Correlation::Undefined(_) => f.write_str("NA"),
        }
    }
}

/// Sample correlation coefficient.
pub fn pearson(y: &[f64], yhat: &[f64]) -> Result<Correlation> {
    check_pairs(y, yhat)?;
    if y.len() < 2 {
        return Ok(Correlation::Undefined("fewer than two samples".into()));
    }
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mh = yhat.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(yhat) {
        let (da, db) = (a - my, b - mh);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 {
        return Ok(Correlation::Undefined("actual values have zero variance".into()));
    }
    if syy == 0.0 {
        return Ok(Correlation::Undefined("estimates have zero variance".into()));
    }
    Ok(Correlation::Defined((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}
