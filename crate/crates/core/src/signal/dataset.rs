//! On-disk dataset layout.
//!
//! ```text
//! <root>/meals.csv                    meal log
//! <root>/<subject>/day<N>/<KIND>.csv  one file per channel; BGL.csv uses the CGM format
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::ingest::{parse_cgm_csv, parse_meal_log, parse_wristband_csv, write_cgm_csv, write_meal_log, write_wristband_csv};
use super::{ChannelKind, MealEvent, RecordingDay, SubjectRecord};
use crate::error::{Error, Result};

pub const MEAL_LOG_FILE: &str = "meals.csv";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub records: Vec<SubjectRecord>,
}

impl Dataset {
    pub fn meals(&self) -> impl Iterator<Item = &MealEvent> {
        self.records.iter().flat_map(|r| r.meals.iter())
    }

    pub fn meal_count(&self) -> usize {
        self.records.iter().map(|r| r.meals.len()).sum()
    }

    pub fn day_count(&self) -> usize {
        self.records.iter().map(|r| r.days.len()).sum()
    }
}

pub fn channel_file_name(kind: ChannelKind) -> String {
    format!("{}.csv", kind.as_str())
}

fn day_dir_name(index: usize) -> String {
    format!("day{}", index + 1)
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
        let path = entry.path();
        if path.is_dir() {
            out.push((entry.file_name().to_string_lossy().into_owned(), path));
        }
    }
    // Natural order so that day10 sorts after day9.
    out.sort_by(|(a, _), (b, _)| (a.len(), a).cmp(&(b.len(), b)));
    Ok(out)
}

fn load_day(dir: &Path) -> Result<RecordingDay> {
    let mut channels = Vec::new();
    let bgl = dir.join(channel_file_name(ChannelKind::Bgl));
    if bgl.exists() {
        channels.push(parse_cgm_csv(&bgl)?);
    }
    for kind in ChannelKind::WRISTBAND {
        let path = dir.join(channel_file_name(kind));
        if path.exists() {
            channels.push(parse_wristband_csv(&path, kind)?);
        }
    }
    Ok(RecordingDay::new(channels))
}

/// Subject directories of a dataset root plus the parsed meal log; subjects
/// are loaded on demand so that only one needs to be in memory at a time.
#[derive(Debug, Clone)]
pub struct DatasetIndex {
    subjects: Vec<(String, PathBuf)>,
    meals: BTreeMap<String, Vec<MealEvent>>,
}

impl DatasetIndex {
    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    pub fn subject_ids(&self) -> impl Iterator<Item = &str> {
        self.subjects.iter().map(|(id, _)| id.as_str())
    }

    pub fn meal_count(&self) -> usize {
        self.meals.values().map(Vec::len).sum()
    }

    /// Reads every recording day of subject `index`.
    pub fn load(&self, index: usize) -> Result<SubjectRecord> {
        let (subject_id, dir) = &self.subjects[index];
        let days = sorted_subdirs(dir)?
            .into_iter()
            .map(|(_, day)| load_day(&day))
            .collect::<Result<Vec<_>>>()?;
        Ok(SubjectRecord {
            subject_id: subject_id.clone(),
            days,
            meals: self.meals.get(subject_id).cloned().unwrap_or_default(),
        })
    }
}

/// Reads the meal log and lists the subject directories under `root`.
pub fn open_dataset(root: impl AsRef<Path>) -> Result<DatasetIndex> {
    let root = root.as_ref();
    let meals = parse_meal_log(root.join(MEAL_LOG_FILE))?;
    let mut by_subject: BTreeMap<String, Vec<MealEvent>> = BTreeMap::new();
    for meal in meals {
        by_subject.entry(meal.subject_id.clone()).or_default().push(meal);
    }
    let subjects = sorted_subdirs(root)?;
    for id in by_subject.keys() {
        if !subjects.iter().any(|(name, _)| name == id) {
            return Err(Error::Validation(format!("meal log names subject {id} but {} has no such directory", root.display())));
        }
    }
    Ok(DatasetIndex {
        subjects,
        meals: by_subject,
    })
}

/// Loads every subject directory under `root` together with the meal log.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    let index = open_dataset(root)?;
    let records = (0..index.len())
        .into_par_iter()
        .map(|i| index.load(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { records })
}

pub fn write_dataset(dataset: &Dataset, root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    for record in &dataset.records {
        write_subject(record, root)?;
    }
    let meals: Vec<MealEvent> = dataset.meals().cloned().collect();
    write_meal_log(&meals, root.join(MEAL_LOG_FILE))
}

/// Writes the channel files of one subject under `root/<subject>`; the meal
/// log is written separately.
pub fn write_subject(record: &SubjectRecord, root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    let jobs: Vec<(PathBuf, &RecordingDay)> = record
        .days
        .iter()
        .enumerate()
        .map(|(i, day)| (root.join(&record.subject_id).join(day_dir_name(i)), day))
        .collect();
    jobs.into_par_iter().try_for_each(|(dir, day)| {
        fs::create_dir_all(&dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        day.channels.par_iter().try_for_each(|(kind, ts)| {
            let path = dir.join(channel_file_name(*kind));
            match kind {
                ChannelKind::Bgl => write_cgm_csv(ts, path),
                ChannelKind::AccMag => Err(Error::Validation("derived ACC_MAG channel cannot be written".into())),
                _ => write_wristband_csv(ts, path),
            }
        })
    })
}

pub fn write_meals(meals: &[MealEvent], root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    fs::create_dir_all(root).map_err(|e| Error::io(format!("creating {}", root.display()), e))?;
    write_meal_log(meals, root.join(MEAL_LOG_FILE))
}
