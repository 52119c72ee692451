use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mealmeter"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

fn mealmeter(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Three subjects over three days, simulated once and shared read-only.
fn shared_dataset() -> &'static Path {
    static DIR: OnceLock<TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let data = dir.path().join("data");
        let out = mealmeter(&["simulate", "--subjects", "3", "--seed", "7", "--out", s(&data)]);
        assert!(out.status.success(), "{}", stderr(&out));
        dir
    })
    .path()
}

fn data_dir() -> PathBuf {
    shared_dataset().join("data")
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

#[test]
fn zero_subjects_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let out = mealmeter(&["simulate", "--subjects", "0", "--out", s(&tmp.path().join("d"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n_subjects"));
}

#[test]
fn unknown_scope_and_config_keys_exit_2() {
    let out = mealmeter(&["run", "--scope", "everyone"]);
    assert_eq!(out.status.code(), Some(2));

    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "horizon = 90\n").unwrap();
    let out = mealmeter(&["run", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("horizon"));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let tmp = TempDir::new().unwrap();
    let run = |name: &str, seed: &str| {
        let dir = tmp.path().join(name);
        let out = mealmeter(&["simulate", "--subjects", "1", "--days", "1", "--seed", seed, "--out", s(&dir)]);
        assert!(out.status.success(), "{}", stderr(&out));
        read_tree(&dir)
    };
    let a = run("a", "3");
    let b = run("b", "3");
    let c = run("c", "4");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.contains_key(Path::new("ground_truth.csv")));
    assert!(a.contains_key(Path::new("meals.csv")));
}

#[test]
fn pooled_run_writes_reports_models_and_is_reproducible() {
    let shared = data_dir();
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let args = ["run", "--data", s(&shared), "--out", s(&out_dir)];
    let out = mealmeter(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let first = read_tree(&out_dir);
    for name in [
        "metrics_pooled.csv",
        "comparison.csv",
        "scatter_carbs.csv",
        "contributions_fat.csv",
        "models/mealmeter_pooled.model",
        "models/huo_pooled.model",
    ] {
        assert!(first.contains_key(Path::new(name)), "missing {name}");
    }
    let metrics = fs::read_to_string(out_dir.join("metrics_pooled.csv")).unwrap();
    assert!(metrics.starts_with("# "), "config echo header");
    assert!(metrics.contains("# components = 3"));

    let comparison = data_lines(&out_dir.join("comparison.csv"));
    assert_eq!(comparison.len(), 3);
    assert!(comparison[1].starts_with("mealmeter,"));
    assert!(comparison[2].starts_with("huo,"));

    let out = mealmeter(&args);
    assert!(out.status.success());
    assert_eq!(read_tree(&out_dir), first);
}

#[test]
fn per_subject_run_has_one_model_per_subject_and_average_row() {
    let shared = data_dir();
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let out = mealmeter(&[
        "run",
        "--data",
        s(&shared),
        "--out",
        s(&out_dir),
        "--scope",
        "per-subject",
        "--method",
        "mealmeter",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let models: Vec<_> = fs::read_dir(out_dir.join("models")).unwrap().collect();
    assert_eq!(models.len(), 3);
    let rows = data_lines(&out_dir.join("metrics_per_subject.csv"));
    assert_eq!(rows.len(), 1 + 3 + 1);
    assert!(rows[0].starts_with("subject,carbs_mae,carbs_rmsre"));
    assert!(rows[4].starts_with("average,"));
    let contributions = data_lines(&out_dir.join("contributions_carbs.csv"));
    assert!(contributions[1].contains("per-subject-mean"));
}

#[test]
fn missing_eda_names_subject_and_channel() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    let out = mealmeter(&["simulate", "--subjects", "2", "--days", "1", "--out", s(&data)]);
    assert!(out.status.success());
    fs::remove_file(data.join("S02/day1/EDA.csv")).unwrap();
    let out_dir = tmp.path().join("out");
    let out = mealmeter(&["run", "--data", s(&data), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("featurize"), "{err}");
    assert!(err.contains("S02") && err.contains("EDA"), "{err}");
    assert!(!out_dir.join("models").exists());
}

#[test]
fn featurize_train_predict_evaluate_contributions() {
    let shared = data_dir();
    let tmp = TempDir::new().unwrap();
    let feats = tmp.path().join("features");
    let out = mealmeter(&["featurize", "--data", s(&shared), "--out", s(&feats)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let header = data_lines(&feats.join("features_mealmeter.csv")).remove(0);
    assert!(header.starts_with("subject_id,timestamp,BGL_PRE_"));
    assert!(header.ends_with("carbs_g,protein_g,fat_g"));
    assert_eq!(data_lines(&feats.join("features_huo.csv")).len(), 1 + 45);

    let trained = tmp.path().join("trained");
    let out = mealmeter(&["train", "--features", s(&feats), "--out", s(&trained)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let model = trained.join("models/mealmeter_pooled.model");
    assert!(model.exists());

    let preds = tmp.path().join("pred");
    let out = mealmeter(&["predict", "--model", s(&model), "--features", s(&feats), "--out", s(&preds)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = data_lines(&preds.join("predictions_mealmeter_pooled.csv"));
    assert_eq!(rows.len(), 1 + 45);
    assert!(rows[0].starts_with("subject_id,timestamp,carbs_pred,carbs_raw,carbs_clamped"));

    let eval = tmp.path().join("eval");
    let out = mealmeter(&["evaluate", "--features", s(&feats), "--out", s(&eval), "--method", "huo"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(eval.join("metrics_pooled.csv").exists());
    assert!(eval.join("scatter_protein.csv").exists());
    assert!(!eval.join("contributions_carbs.csv").exists());

    let contrib = tmp.path().join("contrib");
    let out = mealmeter(&["contributions", "--features", s(&feats), "--out", s(&contrib), "--method", "mealmeter"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let pooled = data_lines(&contrib.join("pooled/contributions_carbs.csv"));
    let per_subject = data_lines(&contrib.join("per_subject/contributions_carbs.csv"));
    assert_eq!(pooled.len(), 1 + 6);
    assert!(pooled[1].starts_with("mealmeter,pooled,"));
    assert_eq!(per_subject.len(), 1 + 6 * 4);
    assert!(per_subject[1].starts_with("mealmeter,per-subject-mean,"));
}

#[test]
fn corrupted_model_is_a_data_error() {
    let shared = data_dir();
    let tmp = TempDir::new().unwrap();
    let model = tmp.path().join("broken.model");
    fs::write(&model, "mealmeter-model\nversion = 1\n").unwrap();
    let out = mealmeter(&["predict", "--model", s(&model), "--data", s(&shared)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("load-model"));
}

#[test]
fn config_subcommand_echoes_overrides() {
    let out = mealmeter(&["config", "--seed", "9", "--scope", "per_subject"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 9"));
    assert!(text.contains("scope = \"per-subject\""));
}
