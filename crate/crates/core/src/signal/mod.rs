//! Channels, meals and subject recordings.
//!
//! Device exports are read by the parsers in [`ingest`]; [`dataset`] maps a
//! directory of such exports onto [`SubjectRecord`]s.

pub mod dataset;
pub mod ingest;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical channel recorded by a device, plus the derived acceleration magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "BGL")]
    Bgl,
    #[serde(rename = "EDA")]
    Eda,
    #[serde(rename = "HR")]
    Hr,
    #[serde(rename = "TEMP")]
    Temp,
    #[serde(rename = "BVP")]
    Bvp,
    #[serde(rename = "ACC_X")]
    AccX,
    #[serde(rename = "ACC_Y")]
    AccY,
    #[serde(rename = "ACC_Z")]
    AccZ,
    /// Only ever produced by [`crate::preprocess::acc_magnitude`].
    #[serde(rename = "ACC_MAG")]
    AccMag,
}

impl ChannelKind {
    pub const WRISTBAND: [ChannelKind; 7] = [
        ChannelKind::Eda,
        ChannelKind::Hr,
        ChannelKind::Temp,
        ChannelKind::Bvp,
        ChannelKind::AccX,
        ChannelKind::AccY,
        ChannelKind::AccZ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Bgl => "BGL",
            ChannelKind::Eda => "EDA",
            ChannelKind::Hr => "HR",
            ChannelKind::Temp => "TEMP",
            ChannelKind::Bvp => "BVP",
            ChannelKind::AccX => "ACC_X",
            ChannelKind::AccY => "ACC_Y",
            ChannelKind::AccZ => "ACC_Z",
            ChannelKind::AccMag => "ACC_MAG",
        }
    }

    pub fn is_ingestable(self) -> bool {
        self != ChannelKind::AccMag
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "BGL" => ChannelKind::Bgl,
            "EDA" => ChannelKind::Eda,
            "HR" => ChannelKind::Hr,
            "TEMP" => ChannelKind::Temp,
            "BVP" => ChannelKind::Bvp,
            "ACC_X" => ChannelKind::AccX,
            "ACC_Y" => ChannelKind::AccY,
            "ACC_Z" => ChannelKind::AccZ,
            "ACC_MAG" => ChannelKind::AccMag,
            other => return Err(Error::Validation(format!("unknown channel kind {other:?}"))),
        })
    }
}

/// One uniformly sampled channel. Sample `i` occurs at `start + i / rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    kind: ChannelKind,
    start: f64,
    rate: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(kind: ChannelKind, start: f64, rate: f64, values: Vec<f64>) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::Validation(format!("{kind}: start time is not finite")));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Validation(format!("{kind}: sample rate must be positive, got {rate}")));
        }
        if values.is_empty() {
            return Err(Error::Validation(format!("{kind}: no samples")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("{kind}: sample {i} is not finite")));
        }
        Ok(TimeSeries {
            kind,
            start,
            rate,
            values,
        })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// Epoch seconds (UTC) of the first sample.
    pub fn start(&self) -> f64 {
        self.start
    }

    /// Sample rate in Hz.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.start + i as f64 / self.rate
    }

    /// Time of the last sample.
    pub fn end(&self) -> f64 {
        self.time_at(self.values.len() - 1)
    }

    /// Seconds between the first and last sample.
    pub fn duration(&self) -> f64 {
        (self.values.len() - 1) as f64 / self.rate
    }

    pub fn with_kind(mut self, kind: ChannelKind) -> Self {
        self.kind = kind;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MealLabel {
    Meal,
    Snack,
}

impl MealLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            MealLabel::Meal => "meal",
            MealLabel::Snack => "snack",
        }
    }
}

impl FromStr for MealLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "meal" => Ok(MealLabel::Meal),
            "snack" => Ok(MealLabel::Snack),
            other => Err(Error::Validation(format!("unknown meal label {other:?}"))),
        }
    }
}

/// Regression target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Carbs,
    Protein,
    Fat,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Carbs, Target::Protein, Target::Fat];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Carbs => "carbs",
            Target::Protein => "protein",
            Target::Fat => "fat",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "carbs" | "carbohydrate" => Ok(Target::Carbs),
            "protein" => Ok(Target::Protein),
            "fat" => Ok(Target::Fat),
            other => Err(Error::Validation(format!("unknown target {other:?}"))),
        }
    }
}

/// Macronutrient masses in grams.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Macros {
    pub carbs_g: f64,
    pub protein_g: f64,
    pub fat_g: f64,
}

impl Macros {
    pub fn new(carbs_g: f64, protein_g: f64, fat_g: f64) -> Self {
        Macros {
            carbs_g,
            protein_g,
            fat_g,
        }
    }

    pub fn get(&self, target: Target) -> f64 {
        match target {
            Target::Carbs => self.carbs_g,
            Target::Protein => self.protein_g,
            Target::Fat => self.fat_g,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.carbs_g, self.protein_g, self.fat_g]
    }

    /// Energy content using 4/4/9 kcal per gram.
    pub fn kcal(&self) -> f64 {
        4.0 * self.carbs_g + 4.0 * self.protein_g + 9.0 * self.fat_g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MealEvent {
    pub subject_id: String,
    /// Epoch seconds (UTC).
    pub timestamp: f64,
    pub macros: Macros,
    pub label: MealLabel,
}

impl MealEvent {
    pub fn new(subject_id: impl Into<String>, timestamp: f64, macros: Macros, label: MealLabel) -> Result<Self> {
        let meal = MealEvent {
            subject_id: subject_id.into(),
            timestamp,
            macros,
            label,
        };
        meal.validate()?;
        Ok(meal)
    }

    pub fn validate(&self) -> Result<()> {
        if self.subject_id.trim().is_empty() {
            return Err(Error::Validation("meal has an empty subject id".into()));
        }
        if !self.timestamp.is_finite() {
            return Err(Error::Validation("meal timestamp is not finite".into()));
        }
        let grams = self.macros.as_array();
        if grams.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::Validation(format!(
                "meal {}@{}: macronutrient grams must be finite and non-negative, got {:?}",
                self.subject_id, self.timestamp, grams
            )));
        }
        if grams.iter().all(|g| *g == 0.0) {
            return Err(Error::Validation(format!(
                "meal {}@{}: at least one macronutrient must be positive",
                self.subject_id, self.timestamp
            )));
        }
        Ok(())
    }
}

/// Channels recorded over one monitoring session.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordingDay {
    pub channels: BTreeMap<ChannelKind, TimeSeries>,
}

impl RecordingDay {
    pub fn new(channels: impl IntoIterator<Item = TimeSeries>) -> Self {
        RecordingDay {
            channels: channels.into_iter().map(|ts| (ts.kind(), ts)).collect(),
        }
    }

    pub fn channel(&self, kind: ChannelKind) -> Option<&TimeSeries> {
        self.channels.get(&kind)
    }

    /// Earliest start and latest end over all channels.
    pub fn span(&self) -> Option<(f64, f64)> {
        self.channels.values().fold(None, |acc, ts| {
            let (s, e) = (ts.start(), ts.end());
            Some(match acc {
                None => (s, e),
                Some((lo, hi)) => (lo.min(s), hi.max(e)),
            })
        })
    }

    pub fn contains(&self, t: f64) -> bool {
        self.span().is_some_and(|(s, e)| t >= s && t <= e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub days: Vec<RecordingDay>,
    /// Sorted by timestamp.
    pub meals: Vec<MealEvent>,
}

impl SubjectRecord {
    /// Index of the recording day whose span contains `t`.
    pub fn day_of(&self, t: f64) -> Option<usize> {
        self.days.iter().position(|d| d.contains(t))
    }
}
