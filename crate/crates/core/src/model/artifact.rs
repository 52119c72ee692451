//! Plain-text model artifact.
//!
//! ```text
//! mealmeter-model
//! version = 1
//! method = mealmeter
//! ...
//! [columns] 96
//! BGL_PRE_MIN
//! ...
//! [standardizer] 96
//! <mu> <sigma>
//! [pca] 96 3
//! <w_i1> <w_i2> <w_i3>
//! explained_variance = ...
//! [regression] 3
//! carbs <intercept> <b_1> ... <b_K>
//! [config] <lines>
//! ...
//! checksum = sha256:<hex of every preceding byte>
//! end
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so load is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use super::pca::PcaLoadings;
use super::pipeline::{FittedPipeline, PipelineSpec};
use super::regression::{LinearFit, RegressionModel};
use super::standardize::Standardizer;
use crate::error::{Error, Result};
use crate::features::Column;
use crate::signal::Target;

pub const ARTIFACT_VERSION: u32 = 1;
const MAGIC: &str = "mealmeter-model";

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

pub fn serialize_pipeline(p: &FittedPipeline) -> String {
    let mut s = String::new();
    let spec = &p.spec;
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "version = {ARTIFACT_VERSION}");
    let _ = writeln!(s, "method = {}", spec.method);
    let _ = writeln!(s, "scope = {}", spec.scope);
    let _ = writeln!(s, "subject = {}", spec.subject.as_deref().unwrap_or("-"));
    let _ = writeln!(s, "split_seed = {}", spec.split_seed);
    let _ = writeln!(s, "split_ratio = {:?}", spec.split_ratio);
    let _ = writeln!(s, "components = {}", spec.components);
    let _ = writeln!(s, "entropy_bins = {}", spec.entropy_bins);
    let _ = writeln!(s, "feature_version = {}", p.feature_version);
    let _ = writeln!(s, "train_rows = {}", p.train_rows);

    let _ = writeln!(s, "[columns] {}", p.columns.len());
    for c in &p.columns {
        let _ = writeln!(s, "{}", c.name());
    }
    let _ = writeln!(s, "[standardizer] {}", p.standardizer.ncols());
    for (m, sd) in p.standardizer.mu.iter().zip(&p.standardizer.sigma) {
        let _ = writeln!(s, "{}", join([*m, *sd]));
    }
    match &p.pca {
        Some(pca) => {
            let _ = writeln!(s, "[pca] {} {}", pca.w.nrows(), pca.w.ncols());
            for row in pca.w.row_iter() {
                let _ = writeln!(s, "{}", join(row.iter().copied()));
            }
            let _ = writeln!(s, "explained_variance = {}", join(pca.explained_variance.iter().copied()));
        }
        None => {
            let _ = writeln!(s, "[pca] none");
        }
    }
    let _ = writeln!(s, "[regression] {}", p.regression.fits[0].coefficients.len());
    for t in Target::ALL {
        let fit = p.regression.get(t);
        let _ = writeln!(
            s,
            "{} {}",
            t.as_str(),
            join(std::iter::once(fit.intercept).chain(fit.coefficients.iter().copied()))
        );
    }
    let echo: Vec<&str> = if p.config_echo.is_empty() { Vec::new() } else { p.config_echo.lines().collect() };
    let _ = writeln!(s, "[config] {}", echo.len());
    for line in echo {
        let _ = writeln!(s, "{line}");
    }
    let digest = Sha256::digest(s.as_bytes());
    let _ = writeln!(s, "checksum = sha256:{}", hex(&digest));
    s.push_str("end\n");
    s
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the artifact atomically (temporary file, then rename).
pub fn save_pipeline(p: &FittedPipeline, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serialize_pipeline(p)).map_err(|e| Error::io(format!("writing {}", tmp.display()), e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(format!("renaming to {}", path.display()), e))
}

pub fn load_pipeline(path: impl AsRef<Path>) -> Result<FittedPipeline> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_pipeline(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::Artifact(format!("file ends before {what}")))
    }

    fn key(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.next_line(key)?;
        let value = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(" = "))
            .ok_or_else(|| Error::Artifact(format!("line {n}: expected `{key} = ...`")))?;
        Ok((n, value))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (n, v) = self.key(key)?;
        v.parse().map_err(|_| Error::Artifact(format!("line {n}: bad value for {key}: {v:?}")))
    }

    fn section(&mut self, name: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, line) = self.next_line(name)?;
        let rest = line
            .strip_prefix(&format!("[{name}]"))
            .ok_or_else(|| Error::Artifact(format!("line {n}: expected section [{name}]")))?;
        Ok((n, rest.split_whitespace().collect()))
    }
}

fn floats(n: usize, line: &str, expected: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Artifact(format!("line {n}: malformed number")))?;
    if values.len() != expected {
        return Err(Error::Artifact(format!("line {n}: expected {expected} numbers, found {}", values.len())));
    }
    Ok(values)
}

fn count(n: usize, tok: Option<&&str>) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Artifact(format!("line {n}: missing or bad section size")))
}

pub fn parse_pipeline(text: &str) -> Result<FittedPipeline> {
    let body_end = text
        .rfind("checksum = sha256:")
        .ok_or_else(|| Error::Artifact("missing checksum line (truncated file?)".into()))?;
    let (body, trailer) = text.split_at(body_end);
    let mut tail = trailer.lines();
    let stored = tail.next().and_then(|l| l.strip_prefix("checksum = sha256:")).unwrap_or("");
    if tail.next() != Some("end") || tail.any(|l| !l.trim().is_empty()) {
        return Err(Error::Artifact("missing end marker (truncated file?)".into()));
    }
    if hex(&Sha256::digest(body.as_bytes())) != stored.trim() {
        return Err(Error::Artifact("checksum mismatch (corrupted file)".into()));
    }

    let mut lines = Lines {
        inner: body.lines().enumerate(),
    };
    let (_, magic) = lines.next_line("header")?;
    if magic != MAGIC {
        return Err(Error::Artifact("not a model artifact".into()));
    }
    let version: u32 = lines.parsed("version")?;
    if version != ARTIFACT_VERSION {
        return Err(Error::Artifact(format!("unsupported artifact version {version} (expected {ARTIFACT_VERSION})")));
    }
    let method = lines.key("method")?.1.parse()?;
    let scope = lines.key("scope")?.1.parse()?;
    let subject = match lines.key("subject")?.1 {
        "-" => None,
        s => Some(s.to_string()),
    };
    let split_seed = lines.parsed("split_seed")?;
    let split_ratio = lines.parsed("split_ratio")?;
    let components = lines.parsed("components")?;
    let entropy_bins = lines.parsed("entropy_bins")?;
    let feature_version = lines.parsed("feature_version")?;
    let train_rows = lines.parsed("train_rows")?;

    let (n, head) = lines.section("columns")?;
    let p = count(n, head.first())?;
    let mut columns = Vec::with_capacity(p);
    for _ in 0..p {
        columns.push(Column::parse(lines.next_line("columns")?.1)?);
    }

    let (n, head) = lines.section("standardizer")?;
    if count(n, head.first())? != p {
        return Err(Error::Artifact(format!("line {n}: standardizer size differs from column count")));
    }
    let mut mu = Vec::with_capacity(p);
    let mut sigma = Vec::with_capacity(p);
    let mut constant_columns = Vec::new();
    for j in 0..p {
        let (n, line) = lines.next_line("standardizer")?;
        let v = floats(n, line, 2)?;
        mu.push(v[0]);
        sigma.push(v[1]);
        if v[1] == 0.0 {
            constant_columns.push(j);
        }
    }

    let (n, head) = lines.section("pca")?;
    let pca = if head == ["none"] {
        None
    } else {
        let rows = count(n, head.first())?;
        let k = count(n, head.get(1))?;
        if rows != p {
            return Err(Error::Artifact(format!("line {n}: loading rows differ from column count")));
        }
        let mut data = Vec::with_capacity(rows * k);
        for _ in 0..rows {
            let (n, line) = lines.next_line("pca")?;
            data.extend(floats(n, line, k)?);
        }
        let (n, ev) = lines.key("explained_variance")?;
        Some(PcaLoadings {
            w: DMatrix::from_row_slice(rows, k, &data),
            explained_variance: floats(n, ev, k)?,
        })
    };

    let (n, head) = lines.section("regression")?;
    let k = count(n, head.first())?;
    let expected_k = pca.as_ref().map_or(p, |w| w.w.ncols());
    if k != expected_k {
        return Err(Error::Artifact(format!("line {n}: regression has {k} coefficients, expected {expected_k}")));
    }
    let mut fits = Vec::with_capacity(3);
    for t in Target::ALL {
        let (n, line) = lines.next_line("regression")?;
        let rest = line
            .strip_prefix(t.as_str())
            .ok_or_else(|| Error::Artifact(format!("line {n}: expected {} coefficients", t.as_str())))?;
        let v = floats(n, rest, k + 1)?;
        fits.push(LinearFit {
            intercept: v[0],
            coefficients: v[1..].to_vec(),
        });
    }
    let fits: [LinearFit; 3] = fits.try_into().map_err(|_| Error::Artifact("regression section".into()))?;

    let (n, head) = lines.section("config")?;
    let echo_lines = count(n, head.first())?;
    let mut config_echo = String::new();
    for _ in 0..echo_lines {
        config_echo.push_str(lines.next_line("config")?.1);
        config_echo.push('\n');
    }
    if let Some((n, extra)) = lines.inner.next() {
        return Err(Error::Artifact(format!("line {}: unexpected content {extra:?}", n + 1)));
    }

    Ok(FittedPipeline {
        spec: PipelineSpec {
            method,
            components,
            entropy_bins,
            scope,
            subject,
            split_seed,
            split_ratio,
        },
        feature_version,
        columns,
        standardizer: Standardizer {
            mu,
            sigma,
            constant_columns,
        },
        pca,
        regression: RegressionModel { fits },
        train_rows,
        config_echo,
    })
}
