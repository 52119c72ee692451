//! Parsers and writers for device-style CSV exports.
//!
//! * wristband channel file: line 1 start (epoch s), line 2 rate (Hz), then
//!   one sample per line;
//! * CGM file: `timestamp,glucose_mg_dl` with ISO-8601 UTC timestamps on a
//!   nominal 5-minute grid;
//! * meal log: `subject_id,timestamp,carbs_g,protein_g,fat_g,label`.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so parsing
//! a written file reproduces every sample bit-exactly.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};

use super::{ChannelKind, MealEvent, MealLabel, Macros, TimeSeries};
use crate::error::{Error, Result};

/// Nominal CGM reading interval in seconds.
pub const CGM_PERIOD_S: f64 = 300.0;
/// Longest run of missing CGM readings that is filled by interpolation.
pub const CGM_MAX_MISSING: usize = 2;

pub const CGM_HEADER: &str = "timestamp,glucose_mg_dl";
pub const MEAL_LOG_HEADER: &str = "subject_id,timestamp,carbs_g,protein_g,fat_g,label";

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Parses epoch seconds, RFC 3339, or a zone-less ISO-8601 timestamp taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let dt = DateTime::parse_from_rfc3339(s)
        .map(|d| d.with_timezone(&Utc))
        .ok()
        .or_else(|| {
            ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
                .iter()
                .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
                .map(|n| n.and_utc())
        })?;
    Some(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9)
}

/// ISO-8601 UTC rendering of epoch seconds (`Z` suffix, fraction only when needed).
pub fn format_timestamp(t: f64) -> String {
    let secs = t.floor();
    let nanos = ((t - secs) * 1e9).round() as u32;
    let (secs, nanos) = if nanos >= 1_000_000_000 {
        (secs as i64 + 1, 0)
    } else {
        (secs as i64, nanos)
    };
    DateTime::from_timestamp(secs, nanos)
        .map(|d| d.to_rfc3339_opts(SecondsFormat::AutoSi, true))
        .unwrap_or_else(|| format!("{t:?}"))
}

fn parse_f64(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok()
}

pub fn parse_wristband_csv(path: impl AsRef<Path>, kind: ChannelKind) -> Result<TimeSeries> {
    let path = path.as_ref();
    parse_wristband_str(&read(path)?, kind, path)
}

/// Parses wristband channel text; `origin` only labels error messages.
pub fn parse_wristband_str(text: &str, kind: ChannelKind, origin: &Path) -> Result<TimeSeries> {
    if !kind.is_ingestable() {
        return Err(Error::parse(origin, 0, format!("{kind} is derived and cannot be ingested")));
    }
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let mut header = |what: &str| -> Result<f64> {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 0, format!("missing {what} header row")))?;
        // Some exports repeat the header value once per column.
        let first = line.split(',').next().unwrap_or_default();
        match parse_f64(first) {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(Error::parse(origin, n, format!("malformed {what} header {line:?}"))),
        }
    };
    let start = header("start time")?;
    let rate = header("sample rate")?;
    if rate <= 0.0 {
        return Err(Error::parse(origin, 2, format!("sample rate must be positive, got {rate}")));
    }

    let mut values = Vec::with_capacity(text.len() / 8);
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        match parse_f64(line) {
            Some(v) if v.is_finite() => values.push(v),
            Some(_) => return Err(Error::parse(origin, n, format!("non-finite sample {line:?}"))),
            None => return Err(Error::parse(origin, n, format!("malformed sample {line:?}"))),
        }
    }
    if values.is_empty() {
        return Err(Error::parse(origin, 3, "file has no samples"));
    }
    TimeSeries::new(kind, start, rate, values)
}

pub fn serialize_wristband(ts: &TimeSeries) -> String {
    let mut out = String::with_capacity(ts.len() * 12 + 48);
    let _ = writeln!(out, "{:?}", ts.start());
    let _ = writeln!(out, "{:?}", ts.rate());
    for v in ts.values() {
        let _ = writeln!(out, "{v:?}");
    }
    out
}

pub fn write_wristband_csv(ts: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &serialize_wristband(ts))
}

pub fn parse_cgm_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    parse_cgm_str(&read(path)?, path)
}

/// Parses CGM readings onto the nominal 5-minute grid.
///
/// Up to [`CGM_MAX_MISSING`] consecutive missing readings are filled by linear
/// interpolation; longer gaps are rejected.
pub fn parse_cgm_str(text: &str, origin: &Path) -> Result<TimeSeries> {
    let mut readings: Vec<(usize, f64, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() || (readings.is_empty() && line.starts_with("timestamp")) {
            continue;
        }
        let mut fields = line.split(',');
        let (ts, glucose) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(Error::parse(origin, n, format!("expected 2 columns, got {line:?}"))),
        };
        let t = parse_timestamp(ts).ok_or_else(|| Error::parse(origin, n, format!("malformed timestamp {ts:?}")))?;
        let g = match parse_f64(glucose) {
            Some(g) if g.is_finite() => g,
            _ => return Err(Error::parse(origin, n, format!("non-numeric glucose {glucose:?}"))),
        };
        readings.push((n, t, g));
    }

    let Some(&(_, start, first)) = readings.first() else {
        return Err(Error::parse(origin, 1, "file has no readings"));
    };
    let mut values = vec![first];
    for pair in readings.windows(2) {
        let (_, t0, g0) = pair[0];
        let (n, t1, g1) = pair[1];
        let dt = t1 - t0;
        if dt <= 0.0 {
            return Err(Error::parse(origin, n, format!("timestamp not after the previous reading ({dt} s)")));
        }
        let steps = (dt / CGM_PERIOD_S).round() as usize;
        if steps == 0 {
            return Err(Error::parse(origin, n, format!("reading only {dt} s after the previous one")));
        }
        if steps > CGM_MAX_MISSING + 1 {
            return Err(Error::parse(
                origin,
                n,
                format!("gap of {dt} s ({} missing readings) exceeds {CGM_MAX_MISSING}", steps - 1),
            ));
        }
        for s in 1..steps {
            let frac = s as f64 / steps as f64;
            values.push(g0 + (g1 - g0) * frac);
        }
        values.push(g1);
    }
    TimeSeries::new(ChannelKind::Bgl, start, 1.0 / CGM_PERIOD_S, values)
}

pub fn serialize_cgm(ts: &TimeSeries) -> String {
    let mut out = String::with_capacity(ts.len() * 32 + 32);
    out.push_str(CGM_HEADER);
    out.push('\n');
    for (i, v) in ts.values().iter().enumerate() {
        let t = ts.start() + i as f64 * CGM_PERIOD_S;
        let _ = writeln!(out, "{},{v:?}", format_timestamp(t));
    }
    out
}

pub fn write_cgm_csv(ts: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &serialize_cgm(ts))
}

pub fn parse_meal_log(path: impl AsRef<Path>) -> Result<Vec<MealEvent>> {
    let path = path.as_ref();
    parse_meal_log_str(&read(path)?, path)
}

/// Parses and validates a meal log; the result is sorted by (subject, time).
pub fn parse_meal_log_str(text: &str, origin: &Path) -> Result<Vec<MealEvent>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(origin, 1, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if headers != MEAL_LOG_HEADER {
        return Err(Error::parse(origin, 1, format!("expected header {MEAL_LOG_HEADER:?}, got {headers:?}")));
    }

    let mut meals = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(origin, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 6 {
            return Err(Error::parse(origin, line, format!("expected 6 columns, got {}", record.len())));
        }
        let grams = |i: usize| {
            parse_f64(&record[i]).ok_or_else(|| Error::parse(origin, line, format!("malformed grams {:?}", &record[i])))
        };
        let timestamp = parse_timestamp(&record[1])
            .ok_or_else(|| Error::parse(origin, line, format!("malformed timestamp {:?}", &record[1])))?;
        let label: MealLabel = record[5].parse().map_err(|e: Error| Error::parse(origin, line, e.to_string()))?;
        let meal = MealEvent::new(&record[0], timestamp, Macros::new(grams(2)?, grams(3)?, grams(4)?), label)
            .map_err(|e| Error::parse(origin, line, e.to_string()))?;
        meals.push(meal);
    }

    meals.sort_by(|a, b| a.subject_id.cmp(&b.subject_id).then(a.timestamp.total_cmp(&b.timestamp)));
    let mut seen = HashSet::new();
    for m in &meals {
        if !seen.insert((m.subject_id.as_str(), m.timestamp.to_bits())) {
            return Err(Error::Validation(format!(
                "{}: duplicate meal for subject {} at {}",
                origin.display(),
                m.subject_id,
                format_timestamp(m.timestamp)
            )));
        }
    }
    Ok(meals)
}

pub fn serialize_meal_log(meals: &[MealEvent]) -> String {
    let mut out = String::new();
    out.push_str(MEAL_LOG_HEADER);
    out.push('\n');
    for m in meals {
        let _ = writeln!(
            out,
            "{},{},{:?},{:?},{:?},{}",
            m.subject_id,
            format_timestamp(m.timestamp),
            m.macros.carbs_g,
            m.macros.protein_g,
            m.macros.fat_g,
            m.label.as_str()
        );
    }
    out
}

pub fn write_meal_log(meals: &[MealEvent], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &serialize_meal_log(meals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn origin() -> &'static Path {
        Path::new("test.csv")
    }

    #[test]
    fn wristband_header_and_body() {
        let ts = parse_wristband_str("1700000000.0\n4.0\n0.1\n0.2\n", ChannelKind::Eda, origin()).unwrap();
        assert_eq!(ts.start(), 1_700_000_000.0);
        assert_eq!(ts.rate(), 4.0);
        assert_eq!(ts.values(), &[0.1, 0.2]);
        assert_eq!(ts.kind(), ChannelKind::Eda);
    }

    #[test]
    fn wristband_nan_names_line() {
        let err = parse_wristband_str("1700000000.0\n4.0\n0.1\nNaN\n", ChannelKind::Eda, origin()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wristband_rejects_bad_headers_and_empty_body() {
        assert!(matches!(
            parse_wristband_str("abc\n4.0\n1\n", ChannelKind::Hr, origin()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_wristband_str("0\nfast\n1\n", ChannelKind::Hr, origin()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_wristband_str("0\n4.0\n", ChannelKind::Hr, origin()).is_err());
        assert!(parse_wristband_str("0\n4.0\n1\n", ChannelKind::AccMag, origin()).is_err());
    }

    #[test]
    fn wristband_sample_count_matches_rows() {
        let body: String = (0..640).map(|i| format!("{}\n", i as f64 * 0.5)).collect();
        let ts = parse_wristband_str(&format!("1700000000.0\n64.0\n{body}"), ChannelKind::Bvp, origin()).unwrap();
        assert_eq!(ts.len(), 640);
        assert_eq!(ts.end() - ts.start(), 639.0 / 64.0);
    }

    #[test]
    fn cgm_without_gaps() {
        let text = "timestamp,glucose_mg_dl\n2024-01-08T08:00:00Z,100\n2024-01-08T08:05:00Z,110\n2024-01-08T08:10:00Z,120\n";
        let ts = parse_cgm_str(text, origin()).unwrap();
        assert_eq!(ts.values(), &[100.0, 110.0, 120.0]);
        assert_eq!(ts.kind(), ChannelKind::Bgl);
        assert_eq!(ts.rate(), 1.0 / 300.0);
        assert_eq!(ts.start(), parse_timestamp("2024-01-08T08:00:00Z").unwrap());
    }

    #[test]
    fn cgm_interpolates_single_missing_reading() {
        let text = "timestamp,glucose_mg_dl\n2024-01-08T08:00:00Z,100\n2024-01-08T08:10:00Z,120\n";
        assert_eq!(parse_cgm_str(text, origin()).unwrap().values(), &[100.0, 110.0, 120.0]);
    }

    #[test]
    fn cgm_two_missing_ok_four_missing_rejected() {
        let ok = "2024-01-08T08:00:00Z,100\n2024-01-08T08:15:00Z,130\n";
        assert_eq!(parse_cgm_str(ok, origin()).unwrap().values(), &[100.0, 110.0, 120.0, 130.0]);
        let bad = "timestamp,glucose_mg_dl\n2024-01-08T08:00:00Z,100\n2024-01-08T08:25:00Z,120\n";
        assert!(matches!(parse_cgm_str(bad, origin()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn cgm_rejects_unordered_and_non_numeric() {
        let unordered = "2024-01-08T08:05:00Z,100\n2024-01-08T08:00:00Z,120\n";
        assert!(parse_cgm_str(unordered, origin()).is_err());
        let low = "2024-01-08T08:00:00Z,100\n2024-01-08T08:05:00Z,Low\n";
        assert!(matches!(parse_cgm_str(low, origin()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn meal_log_sorted_and_validated() {
        let text = "subject_id,timestamp,carbs_g,protein_g,fat_g,label\n\
                    P2,2024-01-08T12:30:00Z,60,20,10,meal\n\
                    P1,2024-01-08T10:30:00Z,20,5,3,snack\n\
                    P1,2024-01-08T08:30:00Z,70,25,15,meal\n";
        let meals = parse_meal_log_str(text, origin()).unwrap();
        let keys: Vec<_> = meals.iter().map(|m| (m.subject_id.as_str(), format_timestamp(m.timestamp))).collect();
        assert_eq!(
            keys,
            vec![
                ("P1", "2024-01-08T08:30:00Z".to_string()),
                ("P1", "2024-01-08T10:30:00Z".to_string()),
                ("P2", "2024-01-08T12:30:00Z".to_string()),
            ]
        );
        assert_eq!(meals[0].macros, Macros::new(70.0, 25.0, 15.0));
        assert_eq!(meals[1].label, MealLabel::Snack);
    }

    #[test]
    fn meal_log_errors() {
        let head = "subject_id,timestamp,carbs_g,protein_g,fat_g,label\n";
        let negative = format!("{head}P1,2024-01-08T08:30:00Z,-5,25,15,meal\n");
        assert!(matches!(parse_meal_log_str(&negative, origin()), Err(Error::Parse { line: 2, .. })));
        let dup = format!("{head}P1,2024-01-08T08:30:00Z,5,25,15,meal\nP1,1704702600,5,2,1,snack\n");
        assert!(matches!(parse_meal_log_str(&dup, origin()), Err(Error::Validation(_))));
        let label = format!("{head}P1,2024-01-08T08:30:00Z,5,25,15,brunch\n");
        assert!(parse_meal_log_str(&label, origin()).is_err());
    }

    #[test]
    fn timestamps_round_trip() {
        for t in [1_704_702_600.0, 0.0, 1_704_702_600.5] {
            assert_eq!(parse_timestamp(&format_timestamp(t)), Some(t));
        }
        assert_eq!(format_timestamp(1_704_702_600.0), "2024-01-08T08:30:00Z");
        assert_eq!(parse_timestamp("2024-01-08 08:30:00"), Some(1_704_702_600.0));
    }

    proptest! {
        #[test]
        fn wristband_reserialization_is_lossless(
            start in 1.0e9f64..2.0e9,
            rate in prop::sample::select(vec![1.0, 4.0, 32.0, 64.0]),
            values in prop::collection::vec(-1.0e6f64..1.0e6, 1..200),
        ) {
            let ts = TimeSeries::new(ChannelKind::Temp, start, rate, values).unwrap();
            let text = serialize_wristband(&ts);
            let parsed = parse_wristband_str(&text, ChannelKind::Temp, origin()).unwrap();
            prop_assert_eq!(&parsed, &ts);
            prop_assert_eq!(serialize_wristband(&parsed), text);
        }

        #[test]
        fn cgm_reserialization_is_lossless(
            start in 1_600_000_000i64..1_800_000_000,
            values in prop::collection::vec(40.0f64..400.0, 1..100),
        ) {
            let ts = TimeSeries::new(ChannelKind::Bgl, start as f64, 1.0 / CGM_PERIOD_S, values).unwrap();
            let parsed = parse_cgm_str(&serialize_cgm(&ts), origin()).unwrap();
            prop_assert_eq!(parsed.values(), ts.values());
            prop_assert_eq!(parsed.start(), ts.start());
        }
    }
}
