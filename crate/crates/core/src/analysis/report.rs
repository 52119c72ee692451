use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::contributions::ContributionReport;
use super::metrics::{mae, pearson, rmsre_excluding_zeros, Correlation};
use super::svg;
use crate::error::{Error, Result};
use crate::model::{Method, Scope};
use crate::signal::ingest::format_timestamp;
use crate::signal::{Macros, Target};

#[derive(Debug, Clone, PartialEq)]
pub struct TargetMetrics {
    pub mae: f64,
    /// `None` when every test target was 0 g.
    pub rmsre: Option<f64>,
    /// Test rows left out of RMSRE because their target is 0 g.
    pub rmsre_excluded: usize,
    pub r: Correlation,
}

/// Scores of one method on one test set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: Method,
    pub scope: Scope,
    /// Set for a single subject's model in per-subject scope.
    pub subject: Option<String>,
    pub metrics: [TargetMetrics; 3],
    pub n_test: usize,
    pub skipped_windows: usize,
}

impl EvalReport {
    pub fn get(&self, t: Target) -> &TargetMetrics {
        &self.metrics[t.index()]
    }
}

/// One test meal with its truth and estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub subject_id: String,
    pub timestamp: f64,
    pub actual: Macros,
    /// Clamped at 0 g.
    pub predicted: [f64; 3],
    pub raw: [f64; 3],
}

pub fn evaluate(
    method: Method,
    scope: Scope,
    subject: Option<String>,
    points: &[ScatterPoint],
    skipped_windows: usize,
) -> Result<EvalReport> {
    if points.is_empty() {
        return Err(Error::Validation(format!(
            "empty test set for {method}{}",
            subject.as_deref().map(|s| format!(" subject {s}")).unwrap_or_default()
        )));
    }
    let mut metrics = Vec::with_capacity(3);
    for t in Target::ALL {
        let y: Vec<f64> = points.iter().map(|p| p.actual.get(t)).collect();
        let yhat: Vec<f64> = points.iter().map(|p| p.predicted[t.index()]).collect();
        let (rmsre, excluded) = rmsre_excluding_zeros(&y, &yhat)?;
        metrics.push(TargetMetrics {
            mae: mae(&y, &yhat)?,
            rmsre,
            rmsre_excluded: excluded,
            r: pearson(&y, &yhat)?,
        });
    }
    Ok(EvalReport {
        method,
        scope,
        subject,
        metrics: metrics.try_into().expect("three targets"),
        n_test: points.len(),
        skipped_windows,
    })
}

/// Everything one method produced in one scope.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub scope: Scope,
    /// Scores over all test rows (in per-subject scope: the union of every subject's test rows).
    pub overall: EvalReport,
    /// One report per subject in per-subject scope; empty when pooled.
    pub per_subject: Vec<EvalReport>,
    pub points: Vec<ScatterPoint>,
    pub contributions: Vec<ContributionReport>,
}

impl MethodResult {
    /// Mean of the per-subject rows, as in an "average" table row.
    pub fn subject_average(&self) -> Option<[(f64, Option<f64>); 3]> {
        if self.per_subject.is_empty() {
            return None;
        }
        let n = self.per_subject.len() as f64;
        Some([0, 1, 2].map(|t| {
            let mae = self.per_subject.iter().map(|r| r.metrics[t].mae).sum::<f64>() / n;
            let defined: Vec<f64> = self.per_subject.iter().filter_map(|r| r.metrics[t].rmsre).collect();
            let rmsre = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
            (mae, rmsre)
        }))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn echo_header(config_echo: &str) -> String {
    config_echo.lines().map(|l| format!("# {l}\n")).collect()
}

pub fn metrics_pooled_csv(results: &[MethodResult]) -> String {
    let mut s = String::from("method");
    for t in Target::ALL {
        let _ = write!(s, ",{0}_mae,{0}_rmsre,{0}_r", t.as_str());
    }
    s.push_str(",n_test,skipped_windows,rmsre_excluded\n");
    for res in results {
        let r = &res.overall;
        s.push_str(res.method.as_str());
        for m in &r.metrics {
            let _ = write!(s, ",{},{},{}", m.mae, opt(m.rmsre), m.r);
        }
        let excluded: usize = r.metrics.iter().map(|m| m.rmsre_excluded).sum();
        let _ = writeln!(s, ",{},{},{excluded}", r.n_test, r.skipped_windows);
    }
    s
}

pub fn metrics_per_subject_csv(results: &[MethodResult]) -> String {
    let mut s = String::from("subject");
    for t in Target::ALL {
        let _ = write!(s, ",{0}_mae,{0}_rmsre", t.as_str());
    }
    s.push_str(",n_test,method\n");
    for res in results {
        for r in &res.per_subject {
            s.push_str(r.subject.as_deref().unwrap_or("-"));
            for m in &r.metrics {
                let _ = write!(s, ",{},{}", m.mae, opt(m.rmsre));
            }
            let _ = writeln!(s, ",{},{}", r.n_test, res.method);
        }
        if let Some(avg) = res.subject_average() {
            s.push_str("average");
            for (m, r) in avg {
                let _ = write!(s, ",{m},{}", opt(r));
            }
            let _ = writeln!(s, ",{},{}", res.overall.n_test, res.method);
        }
    }
    s
}

/// Methods as rows, MAE/RMSRE/r per target as column groups.
pub fn comparison_csv(results: &[MethodResult]) -> String {
    let mut s = String::from("method,label");
    for t in Target::ALL {
        let _ = write!(s, ",{0}_mae,{0}_rmsre,{0}_r", t.as_str());
    }
    s.push('\n');
    for res in results {
        let _ = write!(s, "{},{}", res.method, res.method.label());
        for m in &res.overall.metrics {
            let _ = write!(s, ",{},{},{}", m.mae, opt(m.rmsre), m.r);
        }
        s.push('\n');
    }
    s
}

pub fn scatter_csv(results: &[MethodResult], target: Target) -> String {
    let t = target.index();
    let mut s = String::from("method,subject,timestamp,actual,predicted,raw_predicted,clamped\n");
    for res in results {
        for p in &res.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                res.method,
                p.subject_id,
                format_timestamp(p.timestamp),
                p.actual.get(target),
                p.predicted[t],
                p.raw[t],
                p.raw[t] < 0.0
            );
        }
    }
    s
}

pub fn contributions_csv(results: &[MethodResult], target: Target) -> String {
    let mut s = String::from("method,model,signal,contribution\n");
    for res in results {
        for c in &res.contributions {
            for (sig, g) in c.signals.iter().zip(&c.signal_gamma[target.index()]) {
                let _ = writeln!(s, "{},{},{sig},{g}", res.method, c.model);
            }
        }
    }
    s
}

pub fn feature_contributions_csv(results: &[MethodResult], target: Target) -> String {
    let mut s = String::from("method,model,column,gamma\n");
    for res in results {
        for c in &res.contributions {
            for (col, g) in c.columns.iter().zip(&c.gamma[target.index()]) {
                let _ = writeln!(s, "{},{},{},{g}", res.method, c.model, col.name());
            }
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExportOptions {
    pub svg: bool,
    pub feature_contributions: bool,
}

/// Renders every report file in memory; nothing touches the disk.
pub fn render_report(results: &[MethodResult], config_echo: &str, opts: ExportOptions) -> Result<Vec<(String, String)>> {
    let first = results.first().ok_or_else(|| Error::Validation("no evaluation results to export".into()))?;
    for res in results {
        if res.points.is_empty() || res.overall.n_test == 0 {
            return Err(Error::Validation(format!("{}: empty test set, nothing to report", res.method)));
        }
        if res.scope != first.scope {
            return Err(Error::Validation("results mix scopes".into()));
        }
    }
    let head = echo_header(config_echo);
    let mut files = Vec::new();
    let metrics = match first.scope {
        Scope::Pooled => metrics_pooled_csv(results),
        Scope::PerSubject => metrics_per_subject_csv(results),
    };
    files.push((format!("metrics_{}.csv", first.scope.as_str().replace('-', "_")), format!("{head}{metrics}")));
    files.push(("comparison.csv".into(), format!("{head}{}", comparison_csv(results))));
    for t in Target::ALL {
        files.push((format!("scatter_{}.csv", t.as_str()), format!("{head}{}", scatter_csv(results, t))));
        files.push((format!("contributions_{}.csv", t.as_str()), format!("{head}{}", contributions_csv(results, t))));
        if opts.feature_contributions {
            files.push((
                format!("feature_contributions_{}.csv", t.as_str()),
                format!("{head}{}", feature_contributions_csv(results, t)),
            ));
        }
        if opts.svg {
            files.push((format!("scatter_{}.svg", t.as_str()), svg::scatter(results, t)));
            files.push((format!("contributions_{}.svg", t.as_str()), svg::contributions(results, t)));
        }
    }
    Ok(files)
}

/// Writes the report files into `out_dir`. All content is rendered before the first write,
/// so a failed evaluation leaves no partial report behind.
pub fn export_report(results: &[MethodResult], config_echo: &str, out_dir: impl AsRef<Path>, opts: ExportOptions) -> Result<Vec<PathBuf>> {
    let files = render_report(results, config_echo, opts)?;
    write_files(&files, out_dir)
}

/// Writes rendered `(name, content)` pairs into `out_dir`.
pub fn write_files(files: &[(String, String)], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, content) in files {
        let path = out_dir.join(name);
        fs::write(&path, content).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        written.push(path);
    }
    Ok(written)
}
