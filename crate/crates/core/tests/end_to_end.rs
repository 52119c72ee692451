use std::fs;

use mealmeter_core::analysis::export_report;
use mealmeter_core::model::load_pipeline;
use mealmeter_core::signal::dataset::{load_dataset, write_dataset};
use mealmeter_core::synth::{simulate, simulate_to_dir, GROUND_TRUTH_FILE};
use mealmeter_core::workflow::{featurize_dir, featurize_synthetic, run_from_features};
use mealmeter_core::{RunConfig, Scope, SynthConfig};
use tempfile::TempDir;

fn small(subjects: usize, days: usize) -> RunConfig {
    RunConfig {
        synth: SynthConfig {
            n_subjects: subjects,
            days_per_subject: days,
            day_factors: vec![1.0],
            ..SynthConfig::default()
        },
        ..RunConfig::default()
    }
}

#[test]
fn simulated_dataset_survives_disk_round_trip() {
    let cfg = small(2, 1);
    let (dataset, truth) = simulate(&cfg.synth).unwrap();
    assert_eq!(dataset.meal_count(), 10);
    assert_eq!(truth.rows.len(), 10);
    let tmp = TempDir::new().unwrap();
    write_dataset(&dataset, tmp.path()).unwrap();
    assert_eq!(load_dataset(tmp.path()).unwrap(), dataset);
}

#[test]
fn disk_and_in_memory_features_agree() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small(2, 3);
    cfg.data = tmp.path().join("data");
    let truth = simulate_to_dir(&cfg.synth, &cfg.data).unwrap();
    assert!(cfg.data.join(GROUND_TRUTH_FILE).exists());
    assert_eq!(truth.rows.len(), 30);

    let from_disk = featurize_dir(&cfg).unwrap();
    let (in_memory, truth_again) = featurize_synthetic(&cfg).unwrap();
    assert_eq!(truth_again, truth);
    assert_eq!(from_disk, in_memory);
    assert_eq!(from_disk.window_count(), 30);
    assert_eq!(from_disk.mealmeter.as_ref().unwrap().ncols(), 96);
    assert_eq!(from_disk.huo.as_ref().unwrap().ncols(), 5);
}

#[test]
fn per_subject_run_writes_one_model_per_subject() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small(2, 3);
    cfg.scope = Scope::PerSubject;
    cfg.out = tmp.path().join("out");
    let (features, _) = featurize_synthetic(&cfg).unwrap();
    let summary = run_from_features(&features, &cfg).unwrap();
    assert_eq!(summary.models.len(), 4);
    for fit in &summary.fits {
        assert_eq!(fit.result.per_subject.len(), 2);
        assert_eq!(fit.result.contributions[0].model, "per-subject-mean");
        assert_eq!(fit.result.overall.n_test, 6);
    }

    let metrics = fs::read_to_string(cfg.out.join("metrics_per_subject.csv")).unwrap();
    let rows: Vec<&str> = metrics.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1 + 2 * (2 + 1));
    assert!(rows.iter().filter(|r| r.starts_with("average,")).count() == 2);

    let reloaded = load_pipeline(&summary.models[0]).unwrap();
    assert_eq!(reloaded, summary.fits[0].models[0]);
    let features_s01 = features.mealmeter.as_ref().unwrap().subject_rows("S01");
    assert_eq!(
        reloaded.predict(&features_s01).unwrap(),
        summary.fits[0].models[0].predict(&features_s01).unwrap()
    );
}

#[test]
fn failed_export_leaves_no_files() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    assert!(export_report(&[], "", &out, Default::default()).is_err());
    assert!(!out.exists());

    // Five windows leave four training rows, too few for a three-component regression.
    let mut cfg = small(1, 1);
    cfg.out = out.clone();
    let (features, _) = featurize_synthetic(&cfg).unwrap();
    assert!(run_from_features(&features, &cfg).is_err());
    assert!(!out.exists());
}
