//! Synthetic subject-days with a known dependence of the signals on the meals.
//!
//! Each meal adds a truncated Gaussian bump to BGL (peak `glucose_gain * carbs`),
//! HR (`hr_gain * kcal`), EDA (`eda_gain * (carbs + protein)`) and TEMP
//! (`temp_gain * kcal`). Every bump spans `width` minutes (`sigma = width / 6`)
//! and peaks `delay` minutes after the meal. The glucose delay and width are
//! drawn once per subject-day so that, without noise, post-meal glucose AUC is
//! proportional to carbohydrate mass within a day.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::dataset::{write_meals, write_subject, Dataset};
use crate::signal::ingest::{format_timestamp, CGM_PERIOD_S};
use crate::signal::{ChannelKind, Macros, MealEvent, MealLabel, RecordingDay, SubjectRecord, TimeSeries};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gains {
    /// mg/dL of peak excursion per gram of carbohydrate.
    pub glucose_per_carb_g: f64,
    /// bpm of peak elevation per kcal.
    pub hr_per_kcal: f64,
    /// µS of phasic response per gram of carbohydrate plus protein.
    pub eda_per_g: f64,
    /// °C of peak warming per kcal.
    pub temp_per_kcal: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Gains {
            glucose_per_carb_g: 1.0,
            hr_per_kcal: 0.01,
            eda_per_g: 0.004,
            temp_per_kcal: 0.0003,
        }
    }
}

impl Gains {
    pub fn zero() -> Self {
        Gains {
            glucose_per_carb_g: 0.0,
            hr_per_kcal: 0.0,
            eda_per_g: 0.0,
            temp_per_kcal: 0.0,
        }
    }

    /// Only the glucose response is injected.
    pub fn glucose_only() -> Self {
        Gains {
            glucose_per_carb_g: Gains::default().glucose_per_carb_g,
            ..Gains::zero()
        }
    }
}

/// Additive Gaussian noise SDs, in channel units (ACC in 1/64 g).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSd {
    pub bgl: f64,
    pub hr: f64,
    pub eda: f64,
    pub temp: f64,
    pub acc: f64,
    pub bvp: f64,
}

impl Default for NoiseSd {
    fn default() -> Self {
        NoiseSd {
            bgl: 2.0,
            hr: 1.0,
            eda: 0.01,
            temp: 0.02,
            acc: 1.5,
            bvp: 2.0,
        }
    }
}

impl NoiseSd {
    pub fn zero() -> Self {
        NoiseSd {
            bgl: 0.0,
            hr: 0.0,
            eda: 0.0,
            temp: 0.0,
            acc: 0.0,
            bvp: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub days_per_subject: usize,
    /// First recording day, `YYYY-MM-DD` (UTC); later days follow consecutively.
    pub start_date: String,
    /// Wristband session start, `HH:MM`.
    pub session_start: String,
    pub session_hours: f64,
    /// The CGM starts this many minutes before the wristband session.
    pub cgm_lead_min: f64,
    /// Meal times, `HH:MM`.
    pub schedule: Vec<String>,
    /// Schedule slots served as snacks rather than meals.
    pub snack_slots: Vec<usize>,
    /// Caloric shares of carbohydrate, protein and fat.
    pub carb_fraction: f64,
    pub protein_fraction: f64,
    pub fat_fraction: f64,
    /// Relative jitter applied to each macronutrient's calories.
    pub macro_jitter: f64,
    pub min_grams: f64,
    pub meal_kcal: f64,
    pub snack_kcal: f64,
    /// Hypocaloric, eucaloric and hypercaloric day factors; each subject gets them in a random order.
    pub day_factors: Vec<f64>,
    /// Per-subject energy requirement scale is drawn from `1 ± subject_kcal_spread`.
    pub subject_kcal_spread: f64,
    pub glucose_delay_min: [f64; 2],
    pub glucose_width_min: [f64; 2],
    pub gains: Gains,
    pub noise: NoiseSd,
    /// BVP at 64 Hz is large on disk; off unless requested.
    pub include_bvp: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_subjects: 12,
            days_per_subject: 3,
            start_date: "2024-03-04".into(),
            session_start: "08:00".into(),
            session_hours: 10.0,
            cgm_lead_min: 90.0,
            schedule: ["08:30", "10:30", "12:30", "14:30", "16:30"].map(String::from).to_vec(),
            snack_slots: vec![1, 3],
            carb_fraction: 0.55,
            protein_fraction: 0.20,
            fat_fraction: 0.25,
            macro_jitter: 0.2,
            min_grams: 5.0,
            meal_kcal: 650.0,
            snack_kcal: 220.0,
            day_factors: vec![0.75, 1.0, 1.25],
            subject_kcal_spread: 0.15,
            glucose_delay_min: [30.0, 45.0],
            glucose_width_min: [60.0, 90.0],
            gains: Gains::default(),
            noise: NoiseSd::default(),
            include_bvp: false,
            seed: 42,
        }
    }
}

/// Rates of the simulated channels, in Hz.
pub const BGL_RATE: f64 = 1.0 / CGM_PERIOD_S;
pub const HR_RATE: f64 = 1.0;
pub const EDA_RATE: f64 = 4.0;
pub const TEMP_RATE: f64 = 4.0;
pub const ACC_RATE: f64 = 32.0;
pub const BVP_RATE: f64 = 64.0;

const HR_DELAY_MIN: f64 = 30.0;
const HR_WIDTH_MIN: f64 = 90.0;
const EDA_DELAY_MIN: f64 = 15.0;
const EDA_WIDTH_MIN: f64 = 40.0;
const TEMP_DELAY_MIN: f64 = 40.0;
const TEMP_WIDTH_MIN: f64 = 90.0;
const BGL_BASELINE: f64 = 90.0;
/// Circadian skin-temperature rhythm.
const TEMP_PERIOD_S: f64 = 24.0 * 3600.0;

fn parse_clock(s: &str) -> Result<f64> {
    let (h, m) = s
        .trim()
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("time {s:?} is not HH:MM")))?;
    let h: u32 = h.parse().map_err(|_| Error::Config(format!("bad hour in {s:?}")))?;
    let m: u32 = m.parse().map_err(|_| Error::Config(format!("bad minute in {s:?}")))?;
    if h > 23 || m > 59 {
        return Err(Error::Config(format!("time {s:?} out of range")));
    }
    Ok((h * 3600 + m * 60) as f64)
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(Error::Config("n_subjects must be positive".into()));
        }
        if self.days_per_subject == 0 {
            return Err(Error::Config("days_per_subject must be positive".into()));
        }
        NaiveDate::parse_from_str(&self.start_date, "%Y-%m-%d")
            .map_err(|_| Error::Config(format!("start_date {:?} is not YYYY-MM-DD", self.start_date)))?;
        let start = parse_clock(&self.session_start)?;
        if !(self.session_hours > 0.0 && start + self.session_hours * 3600.0 <= 86400.0) {
            return Err(Error::Config("session must be positive and end within the day".into()));
        }
        if !(self.cgm_lead_min >= 0.0 && self.cgm_lead_min.is_finite()) {
            return Err(Error::Config("cgm_lead_min must be non-negative".into()));
        }
        if self.schedule.is_empty() {
            return Err(Error::Config("meal schedule is empty".into()));
        }
        let end = start + self.session_hours * 3600.0;
        let mut prev = f64::NEG_INFINITY;
        for t in &self.schedule {
            let at = parse_clock(t)?;
            if at < start || at >= end {
                return Err(Error::Config(format!("meal time {t} outside the {}-hour session", self.session_hours)));
            }
            if at <= prev {
                return Err(Error::Config("meal schedule must be strictly increasing".into()));
            }
            prev = at;
        }
        if let Some(s) = self.snack_slots.iter().find(|&&s| s >= self.schedule.len()) {
            return Err(Error::Config(format!("snack slot {s} beyond the schedule")));
        }
        let fractions = [self.carb_fraction, self.protein_fraction, self.fat_fraction];
        if fractions.iter().any(|f| !(*f > 0.0)) || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("macronutrient fractions must be positive and sum to 1".into()));
        }
        if !(0.0..1.0).contains(&self.macro_jitter) || !(0.0..1.0).contains(&self.subject_kcal_spread) {
            return Err(Error::Config("jitter and spread must lie in [0, 1)".into()));
        }
        if !(self.min_grams > 0.0 && self.meal_kcal > 0.0 && self.snack_kcal > 0.0) {
            return Err(Error::Config("min_grams, meal_kcal and snack_kcal must be positive".into()));
        }
        if self.day_factors.is_empty() || self.day_factors.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::Config("day_factors must be non-empty and positive".into()));
        }
        for (name, [lo, hi]) in [("glucose_delay_min", self.glucose_delay_min), ("glucose_width_min", self.glucose_width_min)] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::Config(format!("{name} must be a positive range")));
            }
        }
        let g = &self.gains;
        let n = &self.noise;
        if [g.glucose_per_carb_g, g.hr_per_kcal, g.eda_per_g, g.temp_per_kcal].iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("gains must be finite".into()));
        }
        if [n.bgl, n.hr, n.eda, n.temp, n.acc, n.bvp].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("noise SDs must be finite and non-negative".into()));
        }
        Ok(())
    }

    fn epoch_day(&self, day: usize) -> f64 {
        let date = NaiveDate::parse_from_str(&self.start_date, "%Y-%m-%d").expect("validated");
        let midnight = date.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp() as f64;
        midnight + day as f64 * 86400.0
    }
}

/// Response parameters injected for one meal.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRow {
    pub subject_id: String,
    pub day: usize,
    pub timestamp: f64,
    pub label: MealLabel,
    pub macros: Macros,
    pub glucose_delay_min: f64,
    pub glucose_width_min: f64,
    /// mg/dL above baseline at the peak.
    pub glucose_peak: f64,
    pub hr_peak: f64,
    pub eda_peak: f64,
    pub temp_peak: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub rows: Vec<GroundTruthRow>,
}

/// Truncated Gaussian bump: `peak * exp(-(t - delay)^2 / (2 sigma^2))` for
/// `|t - delay| <= width / 2`, with `sigma = width / 6`; `t` in minutes after the meal.
pub fn bump(t_min: f64, peak: f64, delay_min: f64, width_min: f64) -> f64 {
    let d = t_min - delay_min;
    if peak == 0.0 || d.abs() > width_min / 2.0 {
        return 0.0;
    }
    let sigma = width_min / 6.0;
    peak * (-d * d / (2.0 * sigma * sigma)).exp()
}

/// Noise-free glucose of a subject-day at epoch time `t`.
pub fn glucose_at(t: f64, baseline: f64, meals: &[GroundTruthRow]) -> f64 {
    baseline
        + meals
            .iter()
            .map(|m| bump((t - m.timestamp) / 60.0, m.glucose_peak, m.glucose_delay_min, m.glucose_width_min))
            .sum::<f64>()
}

fn stream(seed: u64, subject: usize, day: Option<usize>) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let day_tag = day.map_or(0xFFFF, |d| d as u64);
    rng.set_stream(((subject as u64) << 16) | day_tag);
    rng
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("finite non-negative sd")
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

struct SubjectParams {
    kcal_scale: f64,
    hr_baseline: f64,
    day_factors: Vec<f64>,
}

fn subject_params(cfg: &SynthConfig, subject: usize) -> SubjectParams {
    let mut rng = stream(cfg.seed, subject, None);
    let spread = cfg.subject_kcal_spread;
    let kcal_scale = 1.0 + rng.random_range(-spread..=spread);
    let hr_baseline = rng.random_range(65.0..=75.0);
    let mut day_factors: Vec<f64> = (0..cfg.days_per_subject).map(|d| cfg.day_factors[d % cfg.day_factors.len()]).collect();
    day_factors.shuffle(&mut rng);
    SubjectParams {
        kcal_scale,
        hr_baseline,
        day_factors,
    }
}

fn draw_macros(cfg: &SynthConfig, kcal: f64, rng: &mut ChaCha8Rng) -> Macros {
    let jitter = |rng: &mut ChaCha8Rng| 1.0 + rng.random_range(-cfg.macro_jitter..=cfg.macro_jitter);
    let grams = |share: f64, per_g: f64, rng: &mut ChaCha8Rng| round_to((kcal * share * jitter(rng) / per_g).max(cfg.min_grams), 0.1);
    let carbs = grams(cfg.carb_fraction, 4.0, rng);
    let protein = grams(cfg.protein_fraction, 4.0, rng);
    let fat = grams(cfg.fat_fraction, 9.0, rng);
    Macros::new(carbs.max(cfg.min_grams), protein.max(cfg.min_grams), fat.max(cfg.min_grams))
}

fn simulate_day(cfg: &SynthConfig, subject_id: &str, subject: usize, day: usize, sp: &SubjectParams) -> Result<(RecordingDay, Vec<GroundTruthRow>)> {
    let mut rng = stream(cfg.seed, subject, Some(day));
    let midnight = cfg.epoch_day(day);
    let session_start = midnight + parse_clock(&cfg.session_start)?;
    let session_s = cfg.session_hours * 3600.0;
    let g = &cfg.gains;

    let glucose_delay = rng.random_range(cfg.glucose_delay_min[0]..=cfg.glucose_delay_min[1]);
    let glucose_width = rng.random_range(cfg.glucose_width_min[0]..=cfg.glucose_width_min[1]);
    let temp_phase = rng.random_range(0.0..std::f64::consts::TAU);
    let eda_level = rng.random_range(1.5..3.0);
    let eda_drift = rng.random_range(-0.3..0.3);
    let temp_level = rng.random_range(32.5..33.5);

    let mut truth = Vec::with_capacity(cfg.schedule.len());
    for (slot, clock) in cfg.schedule.iter().enumerate() {
        let snack = cfg.snack_slots.contains(&slot);
        let base = if snack { cfg.snack_kcal } else { cfg.meal_kcal };
        let kcal = base * sp.kcal_scale * sp.day_factors[day];
        let macros = draw_macros(cfg, kcal, &mut rng);
        let kcal = macros.kcal();
        truth.push(GroundTruthRow {
            subject_id: subject_id.to_string(),
            day,
            timestamp: midnight + parse_clock(clock)?,
            label: if snack { MealLabel::Snack } else { MealLabel::Meal },
            macros,
            glucose_delay_min: glucose_delay,
            glucose_width_min: glucose_width,
            glucose_peak: g.glucose_per_carb_g * macros.carbs_g,
            hr_peak: g.hr_per_kcal * kcal,
            eda_peak: g.eda_per_g * (macros.carbs_g + macros.protein_g),
            temp_peak: g.temp_per_kcal * kcal,
        });
    }

    let response = |t: f64, pick: &dyn Fn(&GroundTruthRow) -> (f64, f64, f64)| -> f64 {
        truth
            .iter()
            .map(|m| {
                let (peak, delay, width) = pick(m);
                bump((t - m.timestamp) / 60.0, peak, delay, width)
            })
            .sum()
    };

    let count = |rate: f64| (session_s * rate).round() as usize + 1;
    let mut channels = Vec::new();

    let cgm_start = session_start - cfg.cgm_lead_min * 60.0;
    let cgm_n = ((session_s + cfg.cgm_lead_min * 60.0) * BGL_RATE).floor() as usize + 1;
    let bgl_noise: Vec<f64> = normal(cfg.noise.bgl).sample_iter(&mut rng).take(cgm_n).collect();
    let bgl: Vec<f64> = (0..cgm_n)
        .map(|i| glucose_at(cgm_start + i as f64 * CGM_PERIOD_S, BGL_BASELINE, &truth) + bgl_noise[i])
        .collect();
    channels.push(TimeSeries::new(ChannelKind::Bgl, cgm_start, BGL_RATE, bgl)?);

    let hr_noise = normal(cfg.noise.hr);
    let hr: Vec<f64> = (0..count(HR_RATE))
        .map(|i| {
            let t = session_start + i as f64 / HR_RATE;
            let v = sp.hr_baseline + response(t, &|m| (m.hr_peak, HR_DELAY_MIN, HR_WIDTH_MIN)) + hr_noise.sample(&mut rng);
            round_to(v, 0.01)
        })
        .collect();
    channels.push(TimeSeries::new(ChannelKind::Hr, session_start, HR_RATE, hr)?);

    let eda_noise = normal(cfg.noise.eda);
    let eda_n = count(EDA_RATE);
    let eda: Vec<f64> = (0..eda_n)
        .map(|i| {
            let t = session_start + i as f64 / EDA_RATE;
            let tonic = eda_level + eda_drift * ((t - session_start) / session_s - 0.5);
            let v = tonic + response(t, &|m| (m.eda_peak, EDA_DELAY_MIN, EDA_WIDTH_MIN)) + eda_noise.sample(&mut rng);
            round_to(v.max(0.0), 1e-6)
        })
        .collect();
    channels.push(TimeSeries::new(ChannelKind::Eda, session_start, EDA_RATE, eda)?);

    let temp_noise = normal(cfg.noise.temp);
    let temp: Vec<f64> = (0..count(TEMP_RATE))
        .map(|i| {
            let t = session_start + i as f64 / TEMP_RATE;
            let slow = 0.3 * (std::f64::consts::TAU * (t - session_start) / TEMP_PERIOD_S + temp_phase).sin();
            let v = temp_level + slow + response(t, &|m| (m.temp_peak, TEMP_DELAY_MIN, TEMP_WIDTH_MIN)) + temp_noise.sample(&mut rng);
            round_to(v, 0.01)
        })
        .collect();
    channels.push(TimeSeries::new(ChannelKind::Temp, session_start, TEMP_RATE, temp)?);

    let acc_noise = normal(cfg.noise.acc);
    let acc_n = count(ACC_RATE);
    for (kind, gravity) in [(ChannelKind::AccX, 0.0), (ChannelKind::AccY, 0.0), (ChannelKind::AccZ, 64.0)] {
        let values: Vec<f64> = (0..acc_n).map(|_| (gravity + acc_noise.sample(&mut rng)).round()).collect();
        channels.push(TimeSeries::new(kind, session_start, ACC_RATE, values)?);
    }

    if cfg.include_bvp {
        let bvp_noise = normal(cfg.noise.bvp);
        let mut phase = 0.0;
        let mut values = Vec::with_capacity(count(BVP_RATE));
        for i in 0..count(BVP_RATE) {
            let t = session_start + i as f64 / BVP_RATE;
            let bpm = sp.hr_baseline + response(t, &|m| (m.hr_peak, HR_DELAY_MIN, HR_WIDTH_MIN));
            phase += std::f64::consts::TAU * bpm / 60.0 / BVP_RATE;
            let pulse = 40.0 * phase.sin() + 12.0 * (2.0 * phase).sin();
            values.push(round_to(pulse + bvp_noise.sample(&mut rng), 0.01));
        }
        channels.push(TimeSeries::new(ChannelKind::Bvp, session_start, BVP_RATE, values)?);
    }

    Ok((RecordingDay::new(channels), truth))
}

/// Zero-padded subject ids (`S01`, `S02`, ...).
pub fn subject_id(index: usize, n_subjects: usize) -> String {
    let width = n_subjects.to_string().len().max(2);
    format!("S{:0width$}", index + 1)
}

/// Generates all days of subject `index` (0-based).
pub fn simulate_subject(cfg: &SynthConfig, index: usize) -> Result<(SubjectRecord, Vec<GroundTruthRow>)> {
    cfg.validate()?;
    let id = subject_id(index, cfg.n_subjects);
    let sp = subject_params(cfg, index);
    let days = (0..cfg.days_per_subject)
        .into_par_iter()
        .map(|d| simulate_day(cfg, &id, index, d, &sp))
        .collect::<Result<Vec<_>>>()?;
    let mut record = SubjectRecord {
        subject_id: id.clone(),
        days: Vec::with_capacity(days.len()),
        meals: Vec::new(),
    };
    let mut truth = Vec::new();
    for (day, rows) in days {
        record.days.push(day);
        for r in &rows {
            record.meals.push(MealEvent::new(&id, r.timestamp, r.macros, r.label)?);
        }
        truth.extend(rows);
    }
    Ok((record, truth))
}

/// Generates every subject-day. Output depends only on the config (including its seed).
pub fn simulate(cfg: &SynthConfig) -> Result<(Dataset, GroundTruth)> {
    cfg.validate()?;
    let subjects = (0..cfg.n_subjects)
        .into_par_iter()
        .map(|s| simulate_subject(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let mut dataset = Dataset::default();
    let mut truth = GroundTruth::default();
    for (record, rows) in subjects {
        dataset.records.push(record);
        truth.rows.extend(rows);
    }
    log::info!(
        "simulated {} subjects, {} days, {} meals",
        dataset.records.len(),
        dataset.day_count(),
        dataset.meal_count()
    );
    Ok((dataset, truth))
}

/// Simulates subject by subject straight into a dataset directory, writing the
/// meal log and `ground_truth.csv` last. Peak memory is one subject.
pub fn simulate_to_dir(cfg: &SynthConfig, root: impl AsRef<Path>) -> Result<GroundTruth> {
    cfg.validate()?;
    let root = root.as_ref();
    let mut meals = Vec::new();
    let mut truth = GroundTruth::default();
    for s in 0..cfg.n_subjects {
        let (record, rows) = simulate_subject(cfg, s)?;
        write_subject(&record, root)?;
        log::info!("wrote subject {}: {} days, {} meals", record.subject_id, record.days.len(), record.meals.len());
        meals.extend(record.meals);
        truth.rows.extend(rows);
    }
    write_meals(&meals, root)?;
    write_ground_truth(&truth, root.join(GROUND_TRUTH_FILE))?;
    Ok(truth)
}

pub fn serialize_ground_truth(truth: &GroundTruth) -> String {
    let mut s = String::from(
        "subject_id,timestamp,day,label,carbs_g,protein_g,fat_g,glucose_delay_min,glucose_width_min,glucose_peak_mg_dl,hr_peak_bpm,eda_peak_us,temp_peak_c\n",
    );
    for r in &truth.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            r.subject_id,
            format_timestamp(r.timestamp),
            r.day + 1,
            r.label.as_str(),
            r.macros.carbs_g,
            r.macros.protein_g,
            r.macros.fat_g,
            r.glucose_delay_min,
            r.glucose_width_min,
            r.glucose_peak,
            r.hr_peak,
            r.eda_peak,
            r.temp_peak
        );
    }
    s
}

pub fn write_ground_truth(truth: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, serialize_ground_truth(truth)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
