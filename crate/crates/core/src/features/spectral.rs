use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Summary of the one-sided periodogram of the mean-removed segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFeatures {
    /// Total power over bins `1..=n/2`; equals the population variance.
    pub psd_power: f64,
    /// Frequency (Hz) of the strongest bin, lowest on ties.
    pub dom_freq: f64,
    /// Shannon entropy of the normalized periodogram divided by `ln(bins)`, in `[0, 1]`.
    pub spec_entropy: f64,
}

impl SpectralFeatures {
    pub fn to_array(&self) -> [f64; 3] {
        [self.psd_power, self.dom_freq, self.spec_entropy]
    }
}

/// One-sided periodogram `P(f_k)` for `k = 1..=n/2`, scaled so that it sums to
/// the variance of `segment`. No taper.
pub fn periodogram(segment: &[f64]) -> Vec<f64> {
    let n = segment.len();
    let mean = segment.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = segment.iter().map(|&v| Complex::new(v - mean, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));

    let norm = 1.0 / (n as f64 * n as f64);
    (1..=n / 2)
        .map(|k| {
            // Bins other than Nyquist stand for both k and n - k.
            let fold = if 2 * k == n { 1.0 } else { 2.0 };
            fold * buf[k].norm_sqr() * norm
        })
        .collect()
}

/// Index of the maximum; the first one wins ties.
fn strongest_bin(power: &[f64]) -> usize {
    power
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

pub fn freq_features(segment: &[f64], rate: f64) -> Result<SpectralFeatures> {
    let n = segment.len();
    if n < 4 {
        return Err(Error::Validation(format!("frequency features need at least 4 samples, got {n}")));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Validation(format!("sample rate must be positive, got {rate}")));
    }
    let constant = segment.iter().all(|&v| v == segment[0]);
    if constant {
        return Ok(SpectralFeatures {
            psd_power: 0.0,
            dom_freq: 0.0,
            spec_entropy: 0.0,
        });
    }

    let power = periodogram(segment);
    let total: f64 = power.iter().sum();
    let dom_freq = (strongest_bin(&power) + 1) as f64 * rate / n as f64;

    let spec_entropy = if total > 0.0 {
        let h: f64 = power
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| {
                let q = p / total;
                -q * q.ln()
            })
            .sum();
        h / (power.len() as f64).ln()
    } else {
        0.0
    };
    Ok(SpectralFeatures {
        psd_power: total,
        dom_freq,
        spec_entropy,
    })
}
