use crate::error::{Error, Result};

/// The 13 time-domain features.
///
/// Moments are population moments; kurtosis is excess kurtosis; quantiles
/// interpolate linearly between order statistics. For a constant segment
/// SKEW, KURT, AUTOCORR, ENTROPY and ZCR are 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeFeatures {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
    pub skew: f64,
    pub kurt: f64,
    pub range: f64,
    pub rms: f64,
    pub median: f64,
    pub autocorr: f64,
    pub iqr: f64,
    pub entropy: f64,
    pub zcr: f64,
}

impl TimeFeatures {
    pub fn to_array(&self) -> [f64; 13] {
        [
            self.min,
            self.max,
            self.mean,
            self.sd,
            self.skew,
            self.kurt,
            self.range,
            self.rms,
            self.median,
            self.autocorr,
            self.iqr,
            self.entropy,
            self.zcr,
        ]
    }
}

/// Quantile of sorted data, interpolating between order statistics at `(n - 1) q`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo as f64)
}

pub fn time_features(segment: &[f64], entropy_bins: usize) -> Result<TimeFeatures> {
    let n = segment.len();
    if n < 2 {
        return Err(Error::Validation(format!("time features need at least 2 samples, got {n}")));
    }
    if entropy_bins == 0 {
        return Err(Error::Validation("entropy needs at least one histogram bin".into()));
    }
    let nf = n as f64;
    let (min, max) = segment
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = segment.iter().sum::<f64>() / nf;
    let rms = (segment.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();

    let mut sorted = segment.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let median = quantile(&sorted, 0.5);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);

    let mut out = TimeFeatures {
        min,
        max,
        mean,
        sd: 0.0,
        skew: 0.0,
        kurt: 0.0,
        range: max - min,
        rms,
        median,
        autocorr: 0.0,
        iqr,
        entropy: 0.0,
        zcr: 0.0,
    };
    if max == min {
        return Ok(out);
    }

    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in segment {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sum_sq = m2;
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    out.sd = m2.sqrt();
    out.skew = m3 / m2.powf(1.5);
    out.kurt = m4 / (m2 * m2) - 3.0;

    let mut lag = 0.0;
    let mut crossings = 0usize;
    for w in segment.windows(2) {
        let (a, b) = (w[0] - mean, w[1] - mean);
        lag += a * b;
        if a * b < 0.0 {
            crossings += 1;
        }
    }
    out.autocorr = lag / sum_sq;
    out.zcr = crossings as f64 / (nf - 1.0);

    let mut counts = vec![0usize; entropy_bins];
    let width = max - min;
    for &v in segment {
        let bin = (((v - min) / width) * entropy_bins as f64).floor() as usize;
        counts[bin.min(entropy_bins - 1)] += 1;
    }
    out.entropy = -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / nf;
            p * p.ln()
        })
        .sum::<f64>();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_segment() {
        let f = time_features(&[5.0; 4], 16).unwrap();
        assert_eq!((f.min, f.max, f.mean, f.median), (5.0, 5.0, 5.0, 5.0));
        assert_eq!((f.sd, f.range, f.iqr), (0.0, 0.0, 0.0));
        assert_eq!(f.rms, 5.0);
        assert_eq!((f.skew, f.kurt, f.autocorr, f.entropy, f.zcr), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn alternating_sign() {
        let f = time_features(&[-1.0, 1.0, -1.0, 1.0], 16).unwrap();
        assert_eq!(f.mean, 0.0);
        assert_eq!(f.zcr, 1.0);
        assert_eq!(f.rms, 1.0);
        assert_eq!(f.sd, 1.0);
        // Two equally populated extreme bins.
        assert!((f.entropy - 2f64.ln()).abs() < 1e-15);
        assert_eq!(f.autocorr, -0.75);
        assert_eq!(f.kurt, -2.0);
    }

    #[test]
    fn sine_statistics() {
        let x: Vec<f64> = (0..1000).map(|i| 2.0 * (2.0 * std::f64::consts::PI * i as f64 / 100.0).sin()).collect();
        let f = time_features(&x, 16).unwrap();
        assert!((f.rms - 2f64.sqrt()).abs() < 0.01);
        assert!(f.mean.abs() < 0.01);
        assert!((f.range - 4.0).abs() < 0.01);
        assert!(f.skew.abs() < 1e-9);
        // A sine's excess kurtosis is -1.5.
        assert!((f.kurt + 1.5).abs() < 1e-6);
    }

    #[test]
    fn quantiles_interpolate() {
        let f = time_features(&[4.0, 1.0, 3.0, 2.0], 16).unwrap();
        assert_eq!(f.median, 2.5);
        // Q1 at h = 0.75 -> 1.75, Q3 at h = 2.25 -> 3.25.
        assert_eq!(f.iqr, 1.5);
    }

    #[test]
    fn exact_zeros_are_not_crossings() {
        // Zero mean; every neighbour pair touches an exact zero.
        let g = time_features(&[-1.0, 0.0, 1.0, 0.0], 16).unwrap();
        assert_eq!(g.mean, 0.0);
        assert_eq!(g.zcr, 0.0);
    }

    #[test]
    fn too_short() {
        assert!(time_features(&[1.0], 16).is_err());
    }
}
