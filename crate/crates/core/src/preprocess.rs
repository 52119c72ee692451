//! Resampling, smoothing, glucose normalization and meal windowing.
//!
//! Stage order per recording day: resample every channel to the common rate,
//! derive the acceleration magnitude and smooth it, cut the pre/post meal
//! windows, then min-normalize glucose jointly over each meal's pre+post window.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ChannelKind, MealEvent, RecordingDay, SubjectRecord, TimeSeries};

/// Windowed signal fed to feature extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SignalName {
    #[serde(rename = "BGL_PRE")]
    BglPre,
    #[serde(rename = "BGL_POST")]
    BglPost,
    #[serde(rename = "EDA")]
    Eda,
    #[serde(rename = "HR")]
    Hr,
    #[serde(rename = "TEMP")]
    Temp,
    #[serde(rename = "ACC_MAG")]
    AccMag,
    #[serde(rename = "BVP")]
    Bvp,
}

impl SignalName {
    pub const ALL: [SignalName; 7] = [
        SignalName::BglPre,
        SignalName::BglPost,
        SignalName::Eda,
        SignalName::Hr,
        SignalName::Temp,
        SignalName::AccMag,
        SignalName::Bvp,
    ];

    /// Default signal set; BVP is opt-in.
    pub const DEFAULT: [SignalName; 6] = [
        SignalName::BglPre,
        SignalName::BglPost,
        SignalName::Eda,
        SignalName::Hr,
        SignalName::Temp,
        SignalName::AccMag,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SignalName::BglPre => "BGL_PRE",
            SignalName::BglPost => "BGL_POST",
            SignalName::Eda => "EDA",
            SignalName::Hr => "HR",
            SignalName::Temp => "TEMP",
            SignalName::AccMag => "ACC_MAG",
            SignalName::Bvp => "BVP",
        }
    }

    /// Raw channels this signal is derived from.
    pub fn source_channels(self) -> &'static [ChannelKind] {
        match self {
            SignalName::BglPre | SignalName::BglPost => &[ChannelKind::Bgl],
            SignalName::Eda => &[ChannelKind::Eda],
            SignalName::Hr => &[ChannelKind::Hr],
            SignalName::Temp => &[ChannelKind::Temp],
            SignalName::Bvp => &[ChannelKind::Bvp],
            SignalName::AccMag => &[ChannelKind::AccX, ChannelKind::AccY, ChannelKind::AccZ],
        }
    }

    fn resampled_channel(self) -> ChannelKind {
        match self {
            SignalName::AccMag => ChannelKind::AccMag,
            other => other.source_channels()[0],
        }
    }
}

impl fmt::Display for SignalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SignalName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown signal {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub horizon_min: f64,
    pub resample_hz: f64,
    pub smoothing_window: usize,
    pub signals: Vec<SignalName>,
    /// Also smooth EDA, HR, TEMP and BVP (acceleration magnitude is always smoothed).
    pub smooth_all: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            horizon_min: 90.0,
            resample_hz: 8.0,
            smoothing_window: 20,
            signals: SignalName::DEFAULT.to_vec(),
            smooth_all: false,
        }
    }
}

impl PreprocessConfig {
    /// Samples per pre- or post-meal segment (43,200 at defaults).
    pub fn window_len(&self) -> usize {
        (self.horizon_min * 60.0 * self.resample_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon_min > 0.0 && self.horizon_min.is_finite()) {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon_min)));
        }
        if !(self.resample_hz > 0.0 && self.resample_hz.is_finite()) {
            return Err(Error::Config(format!("resample rate must be positive, got {}", self.resample_hz)));
        }
        if self.smoothing_window == 0 {
            return Err(Error::Config("smoothing window must be at least 1".into()));
        }
        if self.signals.is_empty() {
            return Err(Error::Config("signal set is empty".into()));
        }
        for (i, s) in self.signals.iter().enumerate() {
            if self.signals[..i].contains(s) {
                return Err(Error::Config(format!("signal {s} listed twice")));
            }
        }
        if self.window_len() < 4 {
            return Err(Error::Config("window shorter than 4 samples".into()));
        }
        Ok(())
    }

    /// Raw channels needed by the configured signal set.
    pub fn required_channels(&self) -> Vec<ChannelKind> {
        let mut kinds: Vec<ChannelKind> = self.signals.iter().flat_map(|s| s.source_channels().iter().copied()).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }
}

/// Resamples onto `start + k / target_rate`, covering the source span.
///
/// Upsampling (and equal rates) interpolates linearly between neighbouring
/// source samples. Downsampling averages the source samples whose times fall
/// in `[k / target, (k + 1) / target)`, interpolating when that interval is
/// empty. Positions past the last source sample clamp to it.
pub fn resample(ts: &TimeSeries, target_rate: f64) -> Result<TimeSeries> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(Error::Validation(format!("target rate must be positive, got {target_rate}")));
    }
    let src = ts.values();
    let n = src.len();
    if n < 2 {
        return Err(Error::Validation(format!("{}: resampling needs at least 2 samples", ts.kind())));
    }
    // Source samples per output sample.
    let ratio = ts.rate() / target_rate;
    let m = (ts.duration() * target_rate + 1e-9).floor() as usize + 1;

    let interpolate = |pos: f64| -> f64 {
        if pos <= 0.0 {
            return src[0];
        }
        let i = pos.floor() as usize;
        if i >= n - 1 {
            return src[n - 1];
        }
        let frac = pos - i as f64;
        src[i] + (src[i + 1] - src[i]) * frac
    };

    let values: Vec<f64> = if ratio <= 1.0 {
        (0..m).map(|k| interpolate(k as f64 * ratio)).collect()
    } else {
        let first_index = |k: usize| ((k as f64 * ratio - 1e-9).ceil().max(0.0) as usize).min(n);
        (0..m)
            .map(|k| {
                let (lo, hi) = (first_index(k), first_index(k + 1));
                if lo < hi {
                    src[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
                } else {
                    interpolate(k as f64 * ratio)
                }
            })
            .collect()
    };
    TimeSeries::new(ts.kind(), ts.start(), target_rate, values)
}

/// Causal trailing mean; the first `window - 1` outputs average every sample so far.
pub fn moving_average_values(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::Validation("moving average window must be at least 1".into()));
    }
    Ok((0..values.len())
        .map(|i| {
            let span = &values[(i + 1).saturating_sub(window)..=i];
            let (lo, hi, sum) = span
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), &v| (lo.min(v), hi.max(v), s + v));
            // The mean lies in [lo, hi]; the clamp only absorbs summation rounding.
            (sum / span.len() as f64).clamp(lo, hi)
        })
        .collect())
}

pub fn moving_average(ts: &TimeSeries, window: usize) -> Result<TimeSeries> {
    TimeSeries::new(ts.kind(), ts.start(), ts.rate(), moving_average_values(ts.values(), window)?)
}

/// Elementwise Euclidean norm of three acceleration axes on a shared grid.
pub fn acc_magnitude(x: &TimeSeries, y: &TimeSeries, z: &TimeSeries) -> Result<TimeSeries> {
    for other in [y, z] {
        if other.rate() != x.rate() || other.start() != x.start() || other.len() != x.len() {
            return Err(Error::Validation(format!(
                "acceleration axes on different grids: {} ({} Hz, start {}, {} samples) vs {} ({} Hz, start {}, {} samples)",
                x.kind(),
                x.rate(),
                x.start(),
                x.len(),
                other.kind(),
                other.rate(),
                other.start(),
                other.len()
            )));
        }
    }
    let values = x
        .values()
        .iter()
        .zip(y.values())
        .zip(z.values())
        .map(|((a, b), c)| (a * a + b * b + c * c).sqrt())
        .collect();
    TimeSeries::new(ChannelKind::AccMag, x.start(), x.rate(), values)
}

/// Subtracts the segment minimum.
pub fn min_normalize(segment: &[f64]) -> Result<Vec<f64>> {
    let min = segment_min(segment)?;
    Ok(segment.iter().map(|v| v - min).collect())
}

/// Subtracts the minimum over the concatenation of `pre` and `post` from both.
pub fn min_normalize_joint(pre: &mut [f64], post: &mut [f64]) -> Result<()> {
    let min = segment_min(pre).unwrap_or(f64::INFINITY).min(segment_min(post).unwrap_or(f64::INFINITY));
    if !min.is_finite() {
        return Err(Error::Validation("min-normalization of an empty window".into()));
    }
    for v in pre.iter_mut().chain(post.iter_mut()) {
        *v -= min;
    }
    Ok(())
}

fn segment_min(segment: &[f64]) -> Result<f64> {
    segment
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or_else(|| Error::Validation("min-normalization of an empty segment".into()))
}

/// Pre/post meal segments of one meal, all at the common resample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MealWindow {
    pub meal: MealEvent,
    pub segments: BTreeMap<SignalName, Vec<f64>>,
}

impl MealWindow {
    pub fn segment(&self, signal: SignalName) -> Option<&[f64]> {
        self.segments.get(&signal).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedMeal {
    pub meal: MealEvent,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowSet {
    pub windows: Vec<MealWindow>,
    pub skipped: Vec<SkippedMeal>,
}

/// Resampled (and, where configured, smoothed) series for one recording day.
fn prepare_day(subject: &str, day: &RecordingDay, cfg: &PreprocessConfig) -> Result<BTreeMap<ChannelKind, TimeSeries>> {
    let channel = |kind: ChannelKind| {
        day.channel(kind).ok_or_else(|| Error::MissingChannel {
            subject: subject.to_string(),
            channel: kind.to_string(),
        })
    };
    let mut out = BTreeMap::new();
    for &signal in &cfg.signals {
        let kind = signal.resampled_channel();
        if out.contains_key(&kind) {
            continue;
        }
        let series = match signal {
            SignalName::AccMag => {
                let axes = signal
                    .source_channels()
                    .iter()
                    .map(|&k| channel(k).and_then(|ts| resample(ts, cfg.resample_hz)))
                    .collect::<Result<Vec<_>>>()?;
                moving_average(&acc_magnitude(&axes[0], &axes[1], &axes[2])?, cfg.smoothing_window)?
            }
            SignalName::BglPre | SignalName::BglPost => resample(channel(kind)?, cfg.resample_hz)?,
            _ => {
                let ts = resample(channel(kind)?, cfg.resample_hz)?;
                if cfg.smooth_all {
                    moving_average(&ts, cfg.smoothing_window)?
                } else {
                    ts
                }
            }
        };
        out.insert(kind, series);
    }
    Ok(out)
}

/// Cuts `[t, t + horizon)` for every configured signal and `[t - horizon, t)`
/// for pre-meal glucose.
///
/// Meals without full coverage are skipped and reported; a missing required
/// channel on a day that has meals is an error.
pub fn extract_meal_windows(record: &SubjectRecord, cfg: &PreprocessConfig) -> Result<WindowSet> {
    cfg.validate()?;
    let len = cfg.window_len();
    let mut set = WindowSet::default();

    let mut meals_by_day: BTreeMap<usize, Vec<&MealEvent>> = BTreeMap::new();
    for meal in &record.meals {
        match record.day_of(meal.timestamp) {
            Some(d) => meals_by_day.entry(d).or_default().push(meal),
            None => set.skipped.push(SkippedMeal {
                meal: meal.clone(),
                reason: "outside every recording day".into(),
            }),
        }
    }

    for (day_index, meals) in meals_by_day {
        let series = prepare_day(&record.subject_id, &record.days[day_index], cfg)?;
        for meal in meals {
            match cut_window(meal, &series, cfg, len) {
                Ok(window) => set.windows.push(window),
                Err(reason) => set.skipped.push(SkippedMeal {
                    meal: meal.clone(),
                    reason,
                }),
            }
        }
    }
    for skip in &set.skipped {
        log::warn!(
            "subject {}: skipping meal at {}: {}",
            record.subject_id,
            crate::signal::ingest::format_timestamp(skip.meal.timestamp),
            skip.reason
        );
    }
    set.windows.sort_by(|a, b| a.meal.timestamp.total_cmp(&b.meal.timestamp));
    Ok(set)
}

fn cut_window(
    meal: &MealEvent,
    series: &BTreeMap<ChannelKind, TimeSeries>,
    cfg: &PreprocessConfig,
    len: usize,
) -> std::result::Result<MealWindow, String> {
    let mut segments = BTreeMap::new();
    for &signal in &cfg.signals {
        let ts = &series[&signal.resampled_channel()];
        // First grid sample at or after the meal.
        let onset = ((meal.timestamp - ts.start()) * ts.rate() - 1e-6).ceil();
        let (from, to) = match signal {
            SignalName::BglPre => (onset - len as f64, onset),
            _ => (onset, onset + len as f64),
        };
        if from < 0.0 || to > ts.len() as f64 {
            let which = if signal == SignalName::BglPre { "pre-meal" } else { "post-meal" };
            return Err(format!("insufficient {which} coverage for {signal}"));
        }
        segments.insert(signal, ts.values()[from as usize..to as usize].to_vec());
    }

    let pre = segments.remove(&SignalName::BglPre);
    let post = segments.remove(&SignalName::BglPost);
    match (pre, post) {
        (Some(mut pre), Some(mut post)) => {
            min_normalize_joint(&mut pre, &mut post).map_err(|e| e.to_string())?;
            segments.insert(SignalName::BglPre, pre);
            segments.insert(SignalName::BglPost, post);
        }
        (Some(only), None) => {
            segments.insert(SignalName::BglPre, min_normalize(&only).map_err(|e| e.to_string())?);
        }
        (None, Some(only)) => {
            segments.insert(SignalName::BglPost, min_normalize(&only).map_err(|e| e.to_string())?);
        }
        (None, None) => {}
    }
    Ok(MealWindow {
        meal: meal.clone(),
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{Macros, MealLabel};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(kind: ChannelKind, rate: f64, values: Vec<f64>) -> TimeSeries {
        TimeSeries::new(kind, 1_000.0, rate, values).unwrap()
    }

    #[test]
    fn upsampled_ramp() {
        let out = resample(&series(ChannelKind::Hr, 1.0, vec![0.0, 1.0, 2.0, 3.0]), 2.0).unwrap();
        assert_eq!(out.values(), &[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!(out.rate(), 2.0);
        assert_eq!(out.start(), 1_000.0);
    }

    #[test]
    fn constants_survive_any_rate_pair() {
        for (from, to) in [(1.0, 8.0), (64.0, 8.0), (32.0, 8.0), (1.0 / 300.0, 8.0), (4.0, 3.0), (8.0, 8.0)] {
            let out = resample(&series(ChannelKind::Eda, from, vec![2.5; 50]), to).unwrap();
            assert!(out.values().iter().all(|&v| v == 2.5), "{from} -> {to}");
        }
    }

    #[test]
    fn downsampling_averages_each_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise: Vec<f64> = (0..640).map(|_| rng.random_range(-1.0..1.0)).collect();
        let out = resample(&series(ChannelKind::Bvp, 64.0, noise.clone()), 8.0).unwrap();
        assert_eq!(out.len(), 80);
        for (k, v) in out.values().iter().enumerate() {
            // Brute force: sources j with j/64 in [k/8, (k+1)/8).
            let members: Vec<f64> = (0..640)
                .filter(|&j| j as f64 / 64.0 >= k as f64 / 8.0 && (j as f64 / 64.0) < (k + 1) as f64 / 8.0)
                .map(|j| noise[j])
                .collect();
            assert_eq!(members.len(), 8);
            let mean = members.iter().sum::<f64>() / 8.0;
            assert!((v - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_needs_two_samples() {
        assert!(resample(&series(ChannelKind::Hr, 1.0, vec![1.0]), 8.0).is_err());
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average_values(&[1.0, 1.0, 1.0, 1.0], 2).unwrap(), vec![1.0; 4]);
        assert_eq!(moving_average_values(&[0.0, 2.0, 4.0, 6.0], 2).unwrap(), vec![0.0, 1.0, 3.0, 5.0]);
        let x = [1.0, 4.0, 2.0, 8.0, 5.0];
        let expanding: Vec<f64> = (0..5).map(|i| x[..=i].iter().sum::<f64>() / (i + 1) as f64).collect();
        assert_eq!(moving_average_values(&x, 20).unwrap(), expanding);
        assert!(moving_average_values(&x, 0).is_err());
    }

    #[test]
    fn magnitude_examples() {
        let m = acc_magnitude(
            &series(ChannelKind::AccX, 32.0, vec![3.0, 0.0]),
            &series(ChannelKind::AccY, 32.0, vec![4.0, 0.0]),
            &series(ChannelKind::AccZ, 32.0, vec![0.0, 0.0]),
        )
        .unwrap();
        assert_eq!(m.values(), &[5.0, 0.0]);
        assert_eq!(m.kind(), ChannelKind::AccMag);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let axes: Vec<Vec<f64>> = (0..3).map(|_| (0..64).map(|_| rng.random_range(-80.0..80.0)).collect()).collect();
        let m = acc_magnitude(
            &series(ChannelKind::AccX, 32.0, axes[0].clone()),
            &series(ChannelKind::AccY, 32.0, axes[1].clone()),
            &series(ChannelKind::AccZ, 32.0, axes[2].clone()),
        )
        .unwrap();
        for i in 0..64 {
            let norm = (axes[0][i].powi(2) + axes[1][i].powi(2) + axes[2][i].powi(2)).sqrt();
            assert_eq!(m.values()[i], norm);
        }

        let short = series(ChannelKind::AccZ, 32.0, vec![0.0]);
        assert!(acc_magnitude(&series(ChannelKind::AccX, 32.0, vec![1.0, 2.0]), &series(ChannelKind::AccY, 32.0, vec![1.0, 2.0]), &short).is_err());
    }

    #[test]
    fn min_normalization() {
        assert_eq!(min_normalize(&[100.0, 110.0, 120.0]).unwrap(), vec![0.0, 10.0, 20.0]);
        assert_eq!(min_normalize(&[90.0, 90.0]).unwrap(), vec![0.0, 0.0]);
        assert!(min_normalize(&[]).is_err());
        let (mut pre, mut post) = (vec![95.0, 90.0], vec![100.0, 140.0]);
        min_normalize_joint(&mut pre, &mut post).unwrap();
        assert_eq!(pre, vec![5.0, 0.0]);
        assert_eq!(post, vec![10.0, 50.0]);
    }

    fn day(start: f64, hours: f64) -> RecordingDay {
        let n8 = |rate: f64| (hours * 3600.0 * rate) as usize + 1;
        RecordingDay::new([
            TimeSeries::new(ChannelKind::Bgl, start, 1.0 / 300.0, (0..n8(1.0 / 300.0)).map(|i| 90.0 + (i % 7) as f64).collect()).unwrap(),
            TimeSeries::new(ChannelKind::Eda, start, 4.0, vec![0.5; n8(4.0)]).unwrap(),
            TimeSeries::new(ChannelKind::Hr, start, 1.0, vec![70.0; n8(1.0)]).unwrap(),
            TimeSeries::new(ChannelKind::Temp, start, 4.0, vec![33.0; n8(4.0)]).unwrap(),
            TimeSeries::new(ChannelKind::AccX, start, 32.0, vec![0.0; n8(32.0)]).unwrap(),
            TimeSeries::new(ChannelKind::AccY, start, 32.0, vec![0.0; n8(32.0)]).unwrap(),
            TimeSeries::new(ChannelKind::AccZ, start, 32.0, vec![64.0; n8(32.0)]).unwrap(),
        ])
    }

    fn meal(t: f64) -> MealEvent {
        MealEvent::new("P1", t, Macros::new(60.0, 20.0, 10.0), MealLabel::Meal).unwrap()
    }

    #[test]
    fn full_coverage_window_lengths() {
        // Recording 08:00-18:00, meal at 12:30.
        let start = 8.0 * 3600.0;
        let record = SubjectRecord {
            subject_id: "P1".into(),
            days: vec![day(start, 10.0)],
            meals: vec![meal(12.5 * 3600.0)],
        };
        let set = extract_meal_windows(&record, &PreprocessConfig::default()).unwrap();
        assert!(set.skipped.is_empty());
        let w = &set.windows[0];
        assert_eq!(w.segments.len(), 6);
        for (signal, seg) in &w.segments {
            assert_eq!(seg.len(), 43_200, "{signal}");
            assert!(seg.iter().all(|v| v.is_finite()));
        }
        let joint_min = w.segments[&SignalName::BglPre]
            .iter()
            .chain(&w.segments[&SignalName::BglPost])
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(joint_min, 0.0);
        assert!(w.segments[&SignalName::AccMag].iter().all(|&v| v == 64.0));
    }

    #[test]
    fn early_meal_is_skipped_and_counted() {
        let start = 8.0 * 3600.0;
        let record = SubjectRecord {
            subject_id: "P1".into(),
            days: vec![day(start, 10.0)],
            meals: vec![meal(start + 1800.0), meal(12.5 * 3600.0), meal(start + 9.0 * 3600.0)],
        };
        let set = extract_meal_windows(&record, &PreprocessConfig::default()).unwrap();
        assert_eq!(set.windows.len(), 1);
        assert_eq!(set.skipped.len(), 2);
        assert!(set.skipped[0].reason.contains("pre-meal"));
        assert!(set.skipped[1].reason.contains("post-meal"));
    }

    #[test]
    fn five_meals_three_days() {
        // Glucose starts 90 min ahead of the wristband session so breakfast has pre-meal coverage.
        let mut days = Vec::new();
        let mut meals = Vec::new();
        for d in 0..3 {
            let midnight = d as f64 * 2.0 * 86_400.0;
            let mut rd = day(midnight + 8.0 * 3600.0, 10.0);
            let bgl_start = midnight + 6.5 * 3600.0;
            rd.channels.insert(
                ChannelKind::Bgl,
                TimeSeries::new(ChannelKind::Bgl, bgl_start, 1.0 / 300.0, vec![95.0; 11 * 12 + 7]).unwrap(),
            );
            days.push(rd);
            for h in [8.5, 10.5, 12.5, 14.5, 16.5] {
                meals.push(meal(midnight + h * 3600.0));
            }
        }
        let record = SubjectRecord {
            subject_id: "P1".into(),
            days,
            meals,
        };
        let set = extract_meal_windows(&record, &PreprocessConfig::default()).unwrap();
        assert_eq!(set.windows.len(), 15);
        assert!(set.skipped.is_empty());
    }

    #[test]
    fn missing_channel_names_subject_and_channel() {
        let mut d = day(0.0, 10.0);
        d.channels.remove(&ChannelKind::Eda);
        let record = SubjectRecord {
            subject_id: "P7".into(),
            days: vec![d],
            meals: vec![meal(4.0 * 3600.0)],
        };
        match extract_meal_windows(&record, &PreprocessConfig::default()) {
            Err(Error::MissingChannel { subject, channel }) => {
                assert_eq!(subject, "P7");
                assert_eq!(channel, "EDA");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn resample_exact_on_affine_upsampling(
            a in -100.0f64..100.0, b in -10.0f64..10.0,
            from in prop::sample::select(vec![1.0 / 300.0, 1.0, 4.0]),
            to in prop::sample::select(vec![4.0, 8.0, 10.0]),
            n in 3usize..60,
        ) {
            prop_assume!(to >= from);
            let ts = series(ChannelKind::Hr, from, (0..n).map(|i| a + b * i as f64 / from).collect());
            let out = resample(&ts, to).unwrap();
            for (k, v) in out.values().iter().enumerate() {
                let t = k as f64 / to;
                prop_assert!((v - (a + b * t)).abs() <= 1e-9 * (1.0 + (a + b * t).abs()));
            }
        }

        #[test]
        fn resample_affine_downsampling_hits_interval_centroid(
            a in -100.0f64..100.0, b in -10.0f64..10.0,
            from in prop::sample::select(vec![16.0, 32.0, 64.0, 10.0]),
            to in prop::sample::select(vec![8.0, 4.0, 3.0]),
            n in 70usize..300,
        ) {
            let ts = series(ChannelKind::Bvp, from, (0..n).map(|i| a + b * i as f64 / from).collect());
            let out = resample(&ts, to).unwrap();
            for (k, v) in out.values().iter().enumerate() {
                let members: Vec<f64> = (0..n)
                    .map(|j| j as f64 / from)
                    .filter(|&t| t >= k as f64 / to - 1e-12 && t < (k + 1) as f64 / to - 1e-12)
                    .collect();
                prop_assume!(!members.is_empty());
                let centroid = members.iter().sum::<f64>() / members.len() as f64;
                prop_assert!((v - (a + b * centroid)).abs() <= 1e-9 * (1.0 + v.abs()));
            }
        }

        #[test]
        fn moving_average_stays_within_input_range(
            values in prop::collection::vec(-1e3f64..1e3, 1..200),
            window in 1usize..40,
        ) {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let out = moving_average_values(&values, window).unwrap();
            prop_assert_eq!(out.len(), values.len());
            prop_assert!(out.iter().all(|&v| v >= lo && v <= hi));
        }

        #[test]
        fn min_normalize_zero_min_and_preserves_differences(values in prop::collection::vec(-1e3f64..1e3, 1..100)) {
            let out = min_normalize(&values).unwrap();
            prop_assert_eq!(out.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
            for i in 1..values.len() {
                prop_assert!(((out[i] - out[0]) - (values[i] - values[0])).abs() <= 1e-9);
            }
        }
    }
}
