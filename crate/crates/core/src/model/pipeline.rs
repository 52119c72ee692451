use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::pca::{fit_pca, PcaLoadings};
use super::regression::RegressionModel;
use super::standardize::{fit_standardizer, Standardizer};
use crate::error::{Error, Result};
use crate::features::{Column, FeatureMatrix, FEATURE_VERSION};

/// Feature front-end paired with the shared regression backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Multimodal statistical features, PCA, linear regression.
    MealMeter,
    /// Gaussian-kernel glucose AUC features with a linear head, no PCA.
    Huo,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::MealMeter, Method::Huo];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::MealMeter => "mealmeter",
            Method::Huo => "huo",
        }
    }

    /// Row label used in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            Method::MealMeter => "MealMeter",
            Method::Huo => "Huo-style features + linear head",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mealmeter" => Ok(Method::MealMeter),
            "huo" => Ok(Method::Huo),
            other => Err(Error::Config(format!("unknown method {other:?} (expected mealmeter or huo)"))),
        }
    }
}

/// Whether one pipeline is fitted per subject or one across all subjects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    #[serde(rename = "per-subject")]
    PerSubject,
    #[serde(rename = "pooled")]
    Pooled,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::PerSubject => "per-subject",
            Scope::Pooled => "pooled",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "per-subject" | "subject" => Ok(Scope::PerSubject),
            "pooled" => Ok(Scope::Pooled),
            other => Err(Error::Config(format!("unknown scope {other:?} (expected per-subject or pooled)"))),
        }
    }
}

/// Everything needed to fit a pipeline besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub method: Method,
    /// PCA components; ignored by [`Method::Huo`].
    pub components: usize,
    pub entropy_bins: usize,
    pub scope: Scope,
    /// Subject the pipeline belongs to in per-subject scope.
    pub subject: Option<String>,
    pub split_seed: u64,
    pub split_ratio: f64,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        PipelineSpec {
            method: Method::MealMeter,
            components: 3,
            entropy_bins: 16,
            scope: Scope::Pooled,
            subject: None,
            split_seed: 42,
            split_ratio: 0.8,
        }
    }
}

/// A trained standardizer, optional PCA projection and three linear heads.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub spec: PipelineSpec,
    pub feature_version: u32,
    /// Column schema; row order of the standardizer and of `W`.
    pub columns: Vec<Column>,
    pub standardizer: Standardizer,
    /// `None` for the kernel baseline, whose scaled features feed the regression directly.
    pub pca: Option<PcaLoadings>,
    pub regression: RegressionModel,
    pub train_rows: usize,
    /// Resolved run configuration, stored verbatim in the artifact.
    pub config_echo: String,
}

/// Per-row estimates for carbs, protein and fat.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Before clamping at 0 g.
    pub raw: Vec<[f64; 3]>,
    pub clamped: Vec<[f64; 3]>,
    pub was_clamped: Vec<[bool; 3]>,
}

impl Prediction {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn clamped_count(&self) -> usize {
        self.was_clamped.iter().flatten().filter(|&&c| c).count()
    }
}

/// Fits standardizer, PCA (MealMeter only) and regression on `train`.
pub fn fit_pipeline(train: &FeatureMatrix, spec: &PipelineSpec) -> Result<FittedPipeline> {
    if train.is_empty() {
        return Err(Error::Validation("no training rows".into()));
    }
    let standardizer = fit_standardizer(&train.values)?;
    let scaled = standardizer.apply(&train.values)?;
    let (pca, scores) = match spec.method {
        Method::MealMeter => {
            let pca = fit_pca(&scaled, spec.components)?;
            let z = pca.transform(&scaled)?;
            (Some(pca), z)
        }
        Method::Huo => (None, scaled),
    };
    let targets: Vec<[f64; 3]> = train.targets.iter().map(|m| m.as_array()).collect();
    let regression = RegressionModel::fit(&scores, &targets)?;
    Ok(FittedPipeline {
        spec: spec.clone(),
        feature_version: FEATURE_VERSION,
        columns: train.columns.clone(),
        standardizer,
        pca,
        regression,
        train_rows: train.nrows(),
        config_echo: String::new(),
    })
}

impl FittedPipeline {
    pub fn check_schema(&self, columns: &[Column]) -> Result<()> {
        if columns == self.columns.as_slice() {
            return Ok(());
        }
        let first_diff = self
            .columns
            .iter()
            .zip(columns)
            .position(|(a, b)| a != b)
            .unwrap_or(self.columns.len().min(columns.len()));
        Err(Error::Schema(format!(
            "model expects {} columns, rows have {} (first difference at column {first_diff})",
            self.columns.len(),
            columns.len()
        )))
    }

    /// `p x K` map from scaled features to regression inputs; the identity when there is no PCA.
    pub fn loadings(&self) -> DMatrix<f64> {
        match &self.pca {
            Some(p) => p.w.clone(),
            None => DMatrix::identity(self.columns.len(), self.columns.len()),
        }
    }

    pub fn scaled(&self, rows: &FeatureMatrix) -> Result<DMatrix<f64>> {
        self.check_schema(&rows.columns)?;
        self.standardizer.apply(&rows.values)
    }

    pub fn scores(&self, rows: &FeatureMatrix) -> Result<DMatrix<f64>> {
        let scaled = self.scaled(rows)?;
        match &self.pca {
            Some(p) => p.transform(&scaled),
            None => Ok(scaled),
        }
    }

    pub fn predict(&self, rows: &FeatureMatrix) -> Result<Prediction> {
        let z = self.scores(rows)?;
        let mut out = Prediction {
            raw: Vec::with_capacity(z.nrows()),
            clamped: Vec::with_capacity(z.nrows()),
            was_clamped: Vec::with_capacity(z.nrows()),
        };
        for i in 0..z.nrows() {
            let zi: Vec<f64> = z.row(i).iter().copied().collect();
            let raw = [0, 1, 2].map(|t| self.regression.fits[t].predict_row(&zi));
            out.raw.push(raw);
            out.clamped.push(raw.map(|v| v.max(0.0)));
            out.was_clamped.push(raw.map(|v| v < 0.0));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::RowKey;
    use crate::preprocess::SignalName;
    use crate::signal::Macros;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matrix(n: usize, p: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let columns: Vec<Column> = (0..p).map(|j| Column::new(SignalName::Hr, format!("F{j}"))).collect();
        let values = DMatrix::from_fn(n, p, |_, _| rng.random_range(-3.0..3.0));
        let targets = (0..n)
            .map(|i| Macros::new(40.0 + 10.0 * values[(i, 0)], 20.0 - values[(i, 1)], 10.0 + values[(i, 2)]))
            .collect();
        let keys = (0..n)
            .map(|i| RowKey {
                subject_id: "S01".into(),
                timestamp: i as f64,
            })
            .collect();
        FeatureMatrix::new(keys, columns, values, targets).unwrap()
    }

    #[test]
    fn train_row_prediction_matches_definition() {
        let m = matrix(20, 6, 1);
        let p = fit_pipeline(&m, &PipelineSpec::default()).unwrap();
        let z = p.scores(&m).unwrap();
        let pred = p.predict(&m).unwrap();
        for i in 0..m.nrows() {
            let fit = &p.regression.fits[0];
            let direct = fit.intercept + (0..3).map(|k| fit.coefficients[k] * z[(i, k)]).sum::<f64>();
            assert_eq!(pred.raw[i][0], direct);
        }
    }

    #[test]
    fn constant_row_predicts_intercept() {
        let mut m = matrix(20, 4, 2);
        m.values.fill(1.5);
        let p = fit_pipeline(&m, &PipelineSpec::default()).unwrap();
        assert_eq!(p.standardizer.constant_columns, vec![0, 1, 2, 3]);
        let pred = p.predict(&m).unwrap();
        for t in 0..3 {
            assert!((pred.raw[0][t] - p.regression.fits[t].intercept).abs() < 1e-12);
            assert_eq!(pred.clamped[0][t], pred.raw[0][t].max(0.0));
        }
    }

    #[test]
    fn negative_estimates_are_clamped_and_flagged() {
        let mut m = matrix(20, 4, 3);
        for (i, t) in m.targets.iter_mut().enumerate() {
            t.fat_g = if i % 2 == 0 { 1.0 } else { 100.0 };
        }
        let p = fit_pipeline(&m, &PipelineSpec::default()).unwrap();
        let mut probe = m.select_rows(&[0]);
        probe.values.fill(0.0);
        let mut fits = p.clone();
        fits.regression.fits[2].intercept = -5.0;
        fits.regression.fits[2].coefficients = vec![0.0; 3];
        let pred = fits.predict(&probe).unwrap();
        assert_eq!(pred.raw[0][2], -5.0);
        assert_eq!(pred.clamped[0][2], 0.0);
        assert!(pred.was_clamped[0][2]);
        assert_eq!(pred.clamped_count(), 1);
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let m = matrix(20, 4, 4);
        let p = fit_pipeline(&m, &PipelineSpec::default()).unwrap();
        let mut other = m.clone();
        other.columns[1] = Column::new(SignalName::Eda, "F1");
        assert!(matches!(p.predict(&other), Err(Error::Schema(_))));
    }

    #[test]
    fn huo_method_skips_pca() {
        let m = matrix(20, 5, 5);
        let spec = PipelineSpec {
            method: Method::Huo,
            ..PipelineSpec::default()
        };
        let p = fit_pipeline(&m, &spec).unwrap();
        assert!(p.pca.is_none());
        assert_eq!(p.regression.fits[0].coefficients.len(), 5);
        assert_eq!(p.loadings(), DMatrix::identity(5, 5));
    }

    #[test]
    fn no_test_leakage() {
        let m = matrix(30, 6, 6);
        let train = m.select_rows(&(0..24).collect::<Vec<_>>());
        let a = fit_pipeline(&train, &PipelineSpec::default()).unwrap();
        let b = fit_pipeline(&train, &PipelineSpec::default()).unwrap();
        assert_eq!(a, b);
        // test rows never reach the fit, whatever their order
        let test_rev = m.select_rows(&[29, 28, 27, 26, 25, 24]);
        let pr = a.predict(&test_rev).unwrap();
        let pf = a.predict(&m.select_rows(&[24, 25, 26, 27, 28, 29])).unwrap();
        assert_eq!(pr.raw[0], pf.raw[5]);
    }

    #[test]
    fn parse_method_and_scope() {
        assert_eq!("HUO".parse::<Method>().unwrap(), Method::Huo);
        assert_eq!("per_subject".parse::<Scope>().unwrap(), Scope::PerSubject);
        assert!("tabpfn".parse::<Method>().is_err());
    }
}
