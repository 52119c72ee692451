use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{segment_features, FeatureConfig, FeatureName};
use crate::error::{Error, Result};
use crate::preprocess::{MealWindow, SignalName};
use crate::signal::ingest::{format_timestamp, parse_timestamp};
use crate::signal::{Macros, Target};

/// Identifies a row: one meal of one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct RowKey {
    pub subject_id: String,
    pub timestamp: f64,
}

/// A feature column: the signal it was computed from and the feature name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Column {
    pub signal: SignalName,
    pub feature: String,
}

impl Column {
    pub fn new(signal: SignalName, feature: impl Into<String>) -> Self {
        Column {
            signal,
            feature: feature.into(),
        }
    }

    /// `<SIGNAL>_<FEATURE>`, e.g. `BGL_POST_MAX`.
    pub fn name(&self) -> String {
        format!("{}_{}", self.signal, self.feature)
    }

    pub fn parse(name: &str) -> Result<Self> {
        SignalName::ALL
            .iter()
            .filter_map(|s| {
                name.strip_prefix(s.as_str())
                    .and_then(|rest| rest.strip_prefix('_'))
                    .filter(|f| !f.is_empty())
                    .map(|f| (s.as_str().len(), Column::new(*s, f)))
            })
            .max_by_key(|(len, _)| *len)
            .map(|(_, c)| c)
            .ok_or_else(|| Error::Schema(format!("column {name:?} does not start with a known signal")))
    }
}

/// Rows are meals, columns are (signal, feature) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub keys: Vec<RowKey>,
    pub columns: Vec<Column>,
    /// `keys.len() x columns.len()`.
    pub values: DMatrix<f64>,
    pub targets: Vec<Macros>,
}

impl FeatureMatrix {
    pub fn new(keys: Vec<RowKey>, columns: Vec<Column>, values: DMatrix<f64>, targets: Vec<Macros>) -> Result<Self> {
        if values.nrows() != keys.len() || targets.len() != keys.len() || values.ncols() != columns.len() {
            return Err(Error::Dimension(format!(
                "{} keys, {} targets, {} columns for a {}x{} matrix",
                keys.len(),
                targets.len(),
                columns.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            if let Some(i) = values.column(j).iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteFeature {
                    row: i,
                    column: col.name(),
                });
            }
        }
        Ok(FeatureMatrix {
            keys,
            columns,
            values,
            targets,
        })
    }

    /// Full (signal, feature) schema of the 16 standard features.
    pub fn standard_columns(signals: &[SignalName]) -> Vec<Column> {
        signals
            .iter()
            .flat_map(|&s| FeatureName::ALL.iter().map(move |f| Column::new(s, f.as_str())))
            .collect()
    }

    pub fn nrows(&self) -> usize {
        self.keys.len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(Column::name).collect()
    }

    /// Signals in column order, each listed once.
    pub fn signals(&self) -> Vec<SignalName> {
        let mut out: Vec<SignalName> = Vec::new();
        for c in &self.columns {
            if !out.contains(&c.signal) {
                out.push(c.signal);
            }
        }
        out
    }

    pub fn target(&self, target: Target) -> Vec<f64> {
        self.targets.iter().map(|m| m.get(target)).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            keys: rows.iter().map(|&i| self.keys[i].clone()).collect(),
            columns: self.columns.clone(),
            values: self.values.select_rows(rows),
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// Subject ids in row order, each listed once.
    pub fn subjects(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for k in &self.keys {
            if !out.contains(&k.subject_id) {
                out.push(k.subject_id.clone());
            }
        }
        out
    }

    pub fn subject_rows(&self, subject: &str) -> FeatureMatrix {
        let rows: Vec<usize> = (0..self.nrows()).filter(|&i| self.keys[i].subject_id == subject).collect();
        self.select_rows(&rows)
    }

    /// Stacks matrices sharing one schema, then orders rows by (subject, time).
    pub fn concat(columns: Vec<Column>, parts: Vec<FeatureMatrix>) -> Result<FeatureMatrix> {
        let mut keys = Vec::new();
        let mut targets = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for part in parts {
            if part.columns != columns {
                return Err(Error::Schema("cannot stack feature matrices with different columns".into()));
            }
            for i in 0..part.nrows() {
                rows.push(part.values.row(i).iter().copied().collect());
            }
            keys.extend(part.keys);
            targets.extend(part.targets);
        }
        Self::from_rows(keys, columns, rows, targets)
    }

    /// Builds a matrix from row vectors, sorting rows by (subject, time).
    pub fn from_rows(keys: Vec<RowKey>, columns: Vec<Column>, rows: Vec<Vec<f64>>, targets: Vec<Macros>) -> Result<Self> {
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| {
            keys[a]
                .subject_id
                .cmp(&keys[b].subject_id)
                .then(keys[a].timestamp.total_cmp(&keys[b].timestamp))
        });
        let p = columns.len();
        let values = DMatrix::from_fn(order.len(), p, |i, j| rows[order[i]][j]);
        FeatureMatrix::new(
            order.iter().map(|&i| keys[i].clone()).collect(),
            columns,
            values,
            order.iter().map(|&i| targets[i]).collect(),
        )
    }
}

/// One row of 16 features per configured signal for every window.
pub fn build_feature_matrix(
    windows: &[MealWindow],
    signals: &[SignalName],
    rate: f64,
    cfg: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let columns = FeatureMatrix::standard_columns(signals);
    let rows = windows
        .par_iter()
        .map(|w| {
            let mut row = Vec::with_capacity(columns.len());
            for &signal in signals {
                let segment = w.segment(signal).ok_or_else(|| {
                    Error::Schema(format!(
                        "window {}@{} has no {signal} segment",
                        w.meal.subject_id,
                        format_timestamp(w.meal.timestamp)
                    ))
                })?;
                row.extend_from_slice(&segment_features(segment, rate, cfg)?);
            }
            Ok(row)
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

pub fn serialize_feature_csv(m: &FeatureMatrix) -> String {
    let mut out = String::new();
    out.push_str("subject_id,timestamp");
    for c in &m.columns {
        out.push(',');
        out.push_str(&c.name());
    }
    out.push_str(",carbs_g,protein_g,fat_g\n");
    for (i, key) in m.keys.iter().enumerate() {
        let _ = write!(out, "{},{}", key.subject_id, format_timestamp(key.timestamp));
        for v in m.values.row(i).iter() {
            let _ = write!(out, ",{v:?}");
        }
        let t = m.targets[i];
        let _ = writeln!(out, ",{:?},{:?},{:?}", t.carbs_g, t.protein_g, t.fat_g);
    }
    out
}

pub fn write_feature_csv(m: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, serialize_feature_csv(m)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_feature_csv(&text, path)
}

pub fn parse_feature_csv(text: &str, origin: &Path) -> Result<FeatureMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(origin, 1, "empty feature file"))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let width = names.len();
    if width < 5 || names[..2] != ["subject_id", "timestamp"] || names[width - 3..] != ["carbs_g", "protein_g", "fat_g"] {
        return Err(Error::parse(origin, 1, "expected header subject_id,timestamp,<features>,carbs_g,protein_g,fat_g"));
    }
    let columns = names[2..width - 3]
        .iter()
        .map(|n| Column::parse(n))
        .collect::<Result<Vec<_>>>()?;

    let (mut keys, mut rows, mut targets) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines {
        let n = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(Error::parse(origin, n, format!("expected {width} fields, got {}", fields.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(origin, n, format!("malformed number {s:?}")))
        };
        let timestamp = parse_timestamp(fields[1]).ok_or_else(|| Error::parse(origin, n, format!("malformed timestamp {:?}", fields[1])))?;
        keys.push(RowKey {
            subject_id: fields[0].to_string(),
            timestamp,
        });
        rows.push(fields[2..width - 3].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?);
        targets.push(Macros::new(num(fields[width - 3])?, num(fields[width - 2])?, num(fields[width - 1])?));
    }
    FeatureMatrix::from_rows(keys, columns, rows, targets)
}
