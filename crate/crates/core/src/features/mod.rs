//! Per-segment time- and frequency-domain features and the feature matrix.

mod matrix;
mod spectral;
mod time;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use matrix::{
    build_feature_matrix, parse_feature_csv, read_feature_csv, serialize_feature_csv, write_feature_csv, Column, FeatureMatrix,
    RowKey,
};
pub use spectral::{freq_features, periodogram, SpectralFeatures};
pub use time::{time_features, TimeFeatures};

use crate::error::{Error, Result};

/// Revision of the feature definitions, recorded in model artifacts.
pub const FEATURE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureName {
    Min,
    Max,
    Mean,
    Sd,
    Skew,
    Kurt,
    Range,
    Rms,
    Median,
    Autocorr,
    Iqr,
    Entropy,
    Zcr,
    PsdPower,
    DomFreq,
    SpecEntropy,
}

impl FeatureName {
    /// Column order within each signal.
    pub const ALL: [FeatureName; 16] = [
        FeatureName::Min,
        FeatureName::Max,
        FeatureName::Mean,
        FeatureName::Sd,
        FeatureName::Skew,
        FeatureName::Kurt,
        FeatureName::Range,
        FeatureName::Rms,
        FeatureName::Median,
        FeatureName::Autocorr,
        FeatureName::Iqr,
        FeatureName::Entropy,
        FeatureName::Zcr,
        FeatureName::PsdPower,
        FeatureName::DomFreq,
        FeatureName::SpecEntropy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureName::Min => "MIN",
            FeatureName::Max => "MAX",
            FeatureName::Mean => "MEAN",
            FeatureName::Sd => "SD",
            FeatureName::Skew => "SKEW",
            FeatureName::Kurt => "KURT",
            FeatureName::Range => "RANGE",
            FeatureName::Rms => "RMS",
            FeatureName::Median => "MEDIAN",
            FeatureName::Autocorr => "AUTOCORR",
            FeatureName::Iqr => "IQR",
            FeatureName::Entropy => "ENTROPY",
            FeatureName::Zcr => "ZCR",
            FeatureName::PsdPower => "PSD_POWER",
            FeatureName::DomFreq => "DOM_FREQ",
            FeatureName::SpecEntropy => "SPEC_ENTROPY",
        }
    }
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown feature {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Histogram bins for the amplitude entropy.
    pub entropy_bins: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { entropy_bins: 16 }
    }
}

/// All 16 features of one segment, in [`FeatureName::ALL`] order.
pub fn segment_features(segment: &[f64], rate: f64, cfg: &FeatureConfig) -> Result<[f64; 16]> {
    let t = time_features(segment, cfg.entropy_bins)?.to_array();
    let s = freq_features(segment, rate)?.to_array();
    let mut out = [0.0; 16];
    out[..13].copy_from_slice(&t);
    out[13..].copy_from_slice(&s);
    Ok(out)
}
