//! Run configuration and the end-to-end experiment: windows, features, split,
//! fit, predict, evaluate, contributions.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{evaluate, export_report, ContributionReport, ExportOptions, MethodResult, ScatterPoint};
use crate::baseline::{huo_feature_matrix, KernelBank};
use crate::error::{Error, Result};
use crate::features::{build_feature_matrix, read_feature_csv, write_feature_csv, FeatureConfig, FeatureMatrix};
use crate::model::{fit_pipeline, save_pipeline, split_train_test, FittedPipeline, Method, PipelineSpec, Scope};
use crate::preprocess::{extract_meal_windows, PreprocessConfig, SignalName, SkippedMeal};
use crate::signal::dataset::open_dataset;
use crate::signal::SubjectRecord;
use crate::synth::{simulate_subject, GroundTruth, SynthConfig};

/// Which feature front-ends to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSelection {
    MealMeter,
    Huo,
    All,
}

impl MethodSelection {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodSelection::MealMeter => vec![Method::MealMeter],
            MethodSelection::Huo => vec![Method::Huo],
            MethodSelection::All => Method::ALL.to_vec(),
        }
    }
}

impl fmt::Display for MethodSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodSelection::MealMeter => "mealmeter",
            MethodSelection::Huo => "huo",
            MethodSelection::All => "all",
        })
    }
}

impl FromStr for MethodSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(MethodSelection::All);
        }
        Ok(match s.parse::<Method>()? {
            Method::MealMeter => MethodSelection::MealMeter,
            Method::Huo => MethodSelection::Huo,
        })
    }
}

/// Every knob of a run. Loaded from TOML; command-line flags override fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset directory (see [`crate::signal::dataset`]).
    pub data: PathBuf,
    /// Output directory for reports and models.
    pub out: PathBuf,
    pub signals: Vec<SignalName>,
    pub horizon_min: f64,
    pub resample_hz: f64,
    pub smoothing_window: usize,
    pub smooth_all: bool,
    pub components: usize,
    pub split_ratio: f64,
    pub seed: u64,
    pub scope: Scope,
    pub method: MethodSelection,
    pub entropy_bins: usize,
    /// Kernel bandwidth of the baseline in minutes; half the kernel spacing when unset.
    pub kernel_bandwidth_min: Option<f64>,
    pub svg: bool,
    pub feature_contributions: bool,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pre = PreprocessConfig::default();
        RunConfig {
            data: PathBuf::from("data"),
            out: PathBuf::from("out"),
            signals: pre.signals,
            horizon_min: pre.horizon_min,
            resample_hz: pre.resample_hz,
            smoothing_window: pre.smoothing_window,
            smooth_all: pre.smooth_all,
            components: 3,
            split_ratio: 0.8,
            seed: 42,
            scope: Scope::Pooled,
            method: MethodSelection::All,
            entropy_bins: FeatureConfig::default().entropy_bins,
            kernel_bandwidth_min: None,
            svg: true,
            feature_contributions: true,
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Resolved configuration as TOML, echoed into every report.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn preprocess(&self) -> PreprocessConfig {
        PreprocessConfig {
            horizon_min: self.horizon_min,
            resample_hz: self.resample_hz,
            smoothing_window: self.smoothing_window,
            signals: self.signals.clone(),
            smooth_all: self.smooth_all,
        }
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            entropy_bins: self.entropy_bins,
        }
    }

    pub fn pipeline_spec(&self, method: Method, scope: Scope, subject: Option<String>) -> PipelineSpec {
        PipelineSpec {
            method,
            components: self.components,
            entropy_bins: self.entropy_bins,
            scope,
            subject,
            split_seed: self.seed,
            split_ratio: self.split_ratio,
        }
    }

    pub fn kernel_bank(&self) -> Result<KernelBank> {
        KernelBank::for_window(self.horizon_min, self.resample_hz, self.kernel_bandwidth_min)
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess().validate()?;
        if self.components == 0 {
            return Err(Error::Config("components must be positive".into()));
        }
        if self.entropy_bins == 0 {
            return Err(Error::Config("entropy_bins must be positive".into()));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!("split_ratio must lie in (0, 1), got {}", self.split_ratio)));
        }
        if let Some(b) = self.kernel_bandwidth_min {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Config(format!("kernel_bandwidth_min must be positive, got {b}")));
            }
        }
        if self.method != MethodSelection::MealMeter && !self.signals.contains(&SignalName::BglPost) {
            return Err(Error::Config("the kernel baseline needs BGL_POST in the signal set".into()));
        }
        self.synth.validate()
    }
}

/// Feature matrices of every requested method over the same meal windows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Featurized {
    pub mealmeter: Option<FeatureMatrix>,
    pub huo: Option<FeatureMatrix>,
    pub skipped: Vec<SkippedMeal>,
}

impl Featurized {
    pub fn matrix(&self, method: Method) -> Option<&FeatureMatrix> {
        match method {
            Method::MealMeter => self.mealmeter.as_ref(),
            Method::Huo => self.huo.as_ref(),
        }
    }

    pub fn window_count(&self) -> usize {
        self.mealmeter.as_ref().or(self.huo.as_ref()).map_or(0, FeatureMatrix::nrows)
    }

    fn skipped_for(&self, subject: &str) -> usize {
        self.skipped.iter().filter(|s| s.meal.subject_id == subject).count()
    }

    /// Stacks the rows of `other` below these.
    pub fn append(&mut self, other: Featurized) -> Result<()> {
        fn stack(a: &mut Option<FeatureMatrix>, b: Option<FeatureMatrix>) -> Result<()> {
            if let Some(b) = b {
                *a = Some(match a.take() {
                    None => b,
                    Some(a) => FeatureMatrix::concat(b.columns.clone(), vec![a, b])?,
                });
            }
            Ok(())
        }
        stack(&mut self.mealmeter, other.mealmeter)?;
        stack(&mut self.huo, other.huo)?;
        self.skipped.extend(other.skipped);
        Ok(())
    }
}

/// Windows one subject and computes the requested feature sets.
pub fn featurize_record(record: &SubjectRecord, cfg: &RunConfig) -> Result<Featurized> {
    let pre = cfg.preprocess();
    let set = extract_meal_windows(record, &pre)?;
    log::info!(
        "subject {}: {} windows, {} meals skipped",
        record.subject_id,
        set.windows.len(),
        set.skipped.len()
    );
    let methods = cfg.method.methods();
    let mealmeter = methods
        .contains(&Method::MealMeter)
        .then(|| build_feature_matrix(&set.windows, &cfg.signals, cfg.resample_hz, &cfg.feature_config()))
        .transpose()?;
    let huo = methods
        .contains(&Method::Huo)
        .then(|| huo_feature_matrix(&set.windows, &cfg.kernel_bank()?))
        .transpose()?;
    Ok(Featurized {
        mealmeter,
        huo,
        skipped: set.skipped,
    })
}

fn featurize_stream(n: usize, load: impl Fn(usize) -> Result<SubjectRecord>, cfg: &RunConfig) -> Result<Featurized> {
    // Subjects are processed one after another so that at most one subject's raw
    // channels are in memory; the work inside a subject runs in parallel.
    let mut all = Featurized::default();
    for i in 0..n {
        let record = load(i)?;
        all.append(featurize_record(&record, cfg)?)?;
    }
    Ok(all)
}

/// Features for every subject of the dataset at `cfg.data`.
pub fn featurize_dir(cfg: &RunConfig) -> Result<Featurized> {
    cfg.validate()?;
    let index = open_dataset(&cfg.data)?;
    log::info!("dataset {}: {} subjects, {} meals", cfg.data.display(), index.len(), index.meal_count());
    featurize_stream(index.len(), |i| index.load(i), cfg)
}

/// Features of a freshly simulated dataset, without touching the disk.
pub fn featurize_synthetic(cfg: &RunConfig) -> Result<(Featurized, GroundTruth)> {
    cfg.validate()?;
    let mut truth = GroundTruth::default();
    let mut all = Featurized::default();
    for i in 0..cfg.synth.n_subjects {
        let (record, rows) = simulate_subject(&cfg.synth, i)?;
        truth.rows.extend(rows);
        all.append(featurize_record(&record, cfg)?)?;
    }
    Ok((all, truth))
}

pub fn features_file_name(method: Method) -> String {
    format!("features_{method}.csv")
}

/// Writes one `features_<method>.csv` per computed feature set.
pub fn write_features(features: &Featurized, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut paths = Vec::new();
    for method in Method::ALL {
        if let Some(m) = features.matrix(method) {
            let path = dir.join(features_file_name(method));
            write_feature_csv(m, &path)?;
            paths.push(path);
        }
    }
    Ok(paths)
}

/// Reads the feature files written by [`write_features`] for `methods`.
pub fn read_features(dir: impl AsRef<Path>, methods: &[Method]) -> Result<Featurized> {
    let dir = dir.as_ref();
    let mut out = Featurized::default();
    for &method in methods {
        let m = read_feature_csv(dir.join(features_file_name(method)))?;
        match method {
            Method::MealMeter => out.mealmeter = Some(m),
            Method::Huo => out.huo = Some(m),
        }
    }
    Ok(out)
}

/// Fitted models and scores of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodFit {
    pub result: MethodResult,
    pub models: Vec<FittedPipeline>,
}

struct FitOutcome {
    model: FittedPipeline,
    points: Vec<ScatterPoint>,
}

fn fit_one(rows: &FeatureMatrix, spec: &PipelineSpec, echo: &str) -> Result<FitOutcome> {
    let (train, test) = split_train_test(rows, spec.split_ratio, spec.split_seed)?;
    let mut model = fit_pipeline(&train, spec)?;
    model.config_echo = echo.to_string();
    let pred = model.predict(&test)?;
    let points = (0..test.nrows())
        .map(|i| ScatterPoint {
            subject_id: test.keys[i].subject_id.clone(),
            timestamp: test.keys[i].timestamp,
            actual: test.targets[i],
            predicted: pred.clamped[i],
            raw: pred.raw[i],
        })
        .collect();
    Ok(FitOutcome { model, points })
}

/// Splits, fits, predicts and scores one method in the configured scope.
pub fn fit_and_evaluate(features: &Featurized, method: Method, cfg: &RunConfig) -> Result<MethodFit> {
    let rows = features
        .matrix(method)
        .ok_or_else(|| Error::Config(format!("no {method} features were computed")))?;
    let echo = cfg.to_toml();
    let skipped_total = features.skipped.len();
    match cfg.scope {
        Scope::Pooled => {
            let spec = cfg.pipeline_spec(method, Scope::Pooled, None);
            let out = fit_one(rows, &spec, &echo)?;
            let overall = evaluate(method, Scope::Pooled, None, &out.points, skipped_total)?;
            let contributions = vec![ContributionReport::from_pipeline(&out.model, "pooled")?];
            log::info!("{method}: pooled model on {} train rows, {} test rows", out.model.train_rows, out.points.len());
            Ok(MethodFit {
                result: MethodResult {
                    method,
                    scope: Scope::Pooled,
                    overall,
                    per_subject: Vec::new(),
                    points: out.points,
                    contributions,
                },
                models: vec![out.model],
            })
        }
        Scope::PerSubject => {
            let subjects = rows.subjects();
            let outcomes = subjects
                .par_iter()
                .map(|s| {
                    let spec = cfg.pipeline_spec(method, Scope::PerSubject, Some(s.clone()));
                    fit_one(&rows.subject_rows(s), &spec, &echo).map_err(|e| match e {
                        Error::Validation(m) => Error::Validation(format!("subject {s}: {m}")),
                        other => other,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut per_subject = Vec::with_capacity(subjects.len());
            let mut reports = Vec::with_capacity(subjects.len());
            let mut points = Vec::new();
            let mut models = Vec::with_capacity(subjects.len());
            for (s, out) in subjects.iter().zip(outcomes) {
                per_subject.push(evaluate(method, Scope::PerSubject, Some(s.clone()), &out.points, features.skipped_for(s))?);
                reports.push(ContributionReport::from_pipeline(&out.model, s.clone())?);
                points.extend(out.points);
                models.push(out.model);
            }
            let overall = evaluate(method, Scope::PerSubject, None, &points, skipped_total)?;
            let mut contributions = vec![ContributionReport::mean(&reports, "per-subject-mean")?];
            contributions.extend(reports);
            log::info!("{method}: {} per-subject models, {} test rows", models.len(), points.len());
            Ok(MethodFit {
                result: MethodResult {
                    method,
                    scope: Scope::PerSubject,
                    overall,
                    per_subject,
                    points,
                    contributions,
                },
                models,
            })
        }
    }
}

/// Every requested method, in [`Method::ALL`] order.
pub fn fit_all(features: &Featurized, cfg: &RunConfig) -> Result<Vec<MethodFit>> {
    cfg.method.methods().into_iter().map(|m| fit_and_evaluate(features, m, cfg)).collect()
}

pub fn model_file_name(model: &FittedPipeline) -> String {
    match &model.spec.subject {
        Some(s) => format!("{}_{}.model", model.spec.method, s),
        None => format!("{}_{}.model", model.spec.method, model.spec.scope.as_str().replace('-', "_")),
    }
}

/// Saves every model under `dir`; nothing is written unless every model serializes.
pub fn save_models(fits: &[MethodFit], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut paths = Vec::new();
    for model in fits.iter().flat_map(|f| &f.models) {
        let path = dir.join(model_file_name(model));
        save_pipeline(model, &path)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn export_options(cfg: &RunConfig) -> ExportOptions {
    ExportOptions {
        svg: cfg.svg,
        feature_contributions: cfg.feature_contributions,
    }
}

/// Outcome of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub windows: usize,
    pub skipped: usize,
    pub fits: Vec<MethodFit>,
    pub reports: Vec<PathBuf>,
    pub models: Vec<PathBuf>,
}

/// Fits and reports from already computed features into `cfg.out`.
pub fn run_from_features(features: &Featurized, cfg: &RunConfig) -> Result<RunSummary> {
    let fits = fit_all(features, cfg)?;
    let results: Vec<MethodResult> = fits.iter().map(|f| f.result.clone()).collect();
    let reports = export_report(&results, &cfg.to_toml(), &cfg.out, export_options(cfg))?;
    let models = save_models(&fits, cfg.out.join("models"))?;
    Ok(RunSummary {
        windows: features.window_count(),
        skipped: features.skipped.len(),
        fits,
        reports,
        models,
    })
}

/// ingest, preprocess, featurize, split, fit, predict, evaluate, contributions, export.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let features = featurize_dir(cfg)?;
    log::info!("{} windows, {} meals skipped", features.window_count(), features.skipped.len());
    run_from_features(&features, cfg)
}
