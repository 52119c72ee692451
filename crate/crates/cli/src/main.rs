use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use mealmeter_core::analysis::{render_report, write_files, MethodResult};
use mealmeter_core::error::{Error, ErrorCategory};
use mealmeter_core::model::load_pipeline;
use mealmeter_core::preprocess::extract_meal_windows;
use mealmeter_core::signal::dataset::open_dataset;
use mealmeter_core::signal::ingest::format_timestamp;
use mealmeter_core::synth::simulate_to_dir;
use mealmeter_core::workflow::{
    export_options, featurize_dir, fit_all, read_features, run_from_features, save_models, write_features, Featurized,
};
use mealmeter_core::{FeatureMatrix, Method, MethodSelection, RunConfig, Scope, Target};

#[derive(Parser, Debug)]
#[command(name = "mealmeter", version, about = "Meal macronutrient estimation from wearable and CGM recordings")]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// TOML run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the train/test split and the simulator.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Model scope: pooled or per-subject.
    #[arg(long, global = true)]
    scope: Option<String>,
    /// mealmeter, huo or all.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dataset directory.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Directory holding features_<method>.csv; skips featurization when given.
    #[arg(long, global = true)]
    features: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset (written to --out, else the configured data directory).
    Simulate {
        /// Override the number of simulated subjects.
        #[arg(long)]
        subjects: Option<usize>,
        /// Override the number of days per subject.
        #[arg(long)]
        days: Option<usize>,
    },
    /// Summarize a dataset directory: channels, sample counts, usable meal windows.
    Ingest,
    /// Compute feature matrices and write them as CSV.
    Featurize,
    /// Fit models on the training split and save the artifacts.
    Train,
    /// Apply a saved model to a feature file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Feature CSV; defaults to <--features>/features_<method>.csv.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fit and score; writes metrics, comparison and scatter files.
    Evaluate,
    /// Signal contributions from pooled and per-subject models, each in its own subdirectory.
    Contributions,
    /// Every report file (metrics, scatter, contributions, plots).
    Report,
    /// The whole workflow: reports plus model artifacts.
    Run,
    /// Print the resolved configuration as TOML.
    Config,
}

struct Failure {
    stage: &'static str,
    error: Error,
}

type Staged<T> = std::result::Result<T, Failure>;

trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Staged<T>;
}

impl<T> StageExt<T> for mealmeter_core::Result<T> {
    fn stage(self, stage: &'static str) -> Staged<T> {
        self.map_err(|error| Failure { stage, error })
    }
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Config => 2,
        ErrorCategory::Data | ErrorCategory::Io => 3,
        ErrorCategory::Numerical => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mealmeter: {} failed: {}", f.stage, f.error);
            ExitCode::from(exit_code(f.error.category()))
        }
    }
}

fn resolve(opts: &GlobalOpts) -> mealmeter_core::Result<RunConfig> {
    let mut cfg = match &opts.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
        cfg.synth.seed = seed;
    }
    if let Some(scope) = &opts.scope {
        cfg.scope = scope.parse()?;
    }
    if let Some(method) = &opts.method {
        cfg.method = method.parse()?;
    }
    if let Some(out) = &opts.out {
        cfg.out = out.clone();
    }
    if let Some(data) = &opts.data {
        cfg.data = data.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Staged<()> {
    let mut cfg = resolve(&cli.opts).stage("config")?;
    if let Command::Simulate { subjects, days } = &cli.command {
        if let Some(n) = subjects {
            cfg.synth.n_subjects = *n;
        }
        if let Some(d) = days {
            cfg.synth.days_per_subject = *d;
        }
        let root = cli.opts.out.clone().unwrap_or_else(|| cfg.data.clone());
        return simulate(&cfg, &root);
    }
    cfg.validate().stage("config")?;
    match cli.command {
        Command::Simulate { .. } => unreachable!(),
        Command::Config => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Ingest => ingest(&cfg),
        Command::Featurize => {
            let features = featurize(&cfg, None)?;
            let paths = write_features(&features, &cfg.out).stage("featurize")?;
            write_skipped(&features, &cfg.out).stage("featurize")?;
            print_paths(paths);
            Ok(())
        }
        Command::Train => {
            let features = featurize(&cfg, cli.opts.features.as_deref())?;
            let fits = fit_all(&features, &cfg).stage("fit")?;
            save_models(&fits, cfg.out.join("models")).stage("save-models").map(print_paths)
        }
        Command::Predict { model, input } => predict(&cfg, &model, input.as_deref(), cli.opts.features.as_deref()),
        Command::Evaluate => {
            let features = featurize(&cfg, cli.opts.features.as_deref())?;
            let results = results_for(&features, &cfg)?;
            let files = render_report(&results, &cfg.to_toml(), export_options(&cfg)).stage("evaluate")?;
            let keep: Vec<_> = files
                .into_iter()
                .filter(|(name, _)| {
                    name.starts_with("metrics_") || name.starts_with("comparison") || name.starts_with("scatter_")
                })
                .collect();
            print_metrics(&results);
            write_files(&keep, &cfg.out).stage("report").map(print_paths)
        }
        Command::Contributions => {
            let features = featurize(&cfg, cli.opts.features.as_deref())?;
            for scope in [Scope::Pooled, Scope::PerSubject] {
                let scoped = RunConfig { scope, ..cfg.clone() };
                let results = results_for(&features, &scoped)?;
                let files = render_report(&results, &scoped.to_toml(), export_options(&scoped)).stage("contributions")?;
                let keep: Vec<_> = files
                    .into_iter()
                    .filter(|(name, _)| name.starts_with("contributions_") || name.starts_with("feature_contributions_"))
                    .collect();
                let dir = cfg.out.join(scope.as_str().replace('-', "_"));
                write_files(&keep, dir).stage("report").map(print_paths)?;
            }
            Ok(())
        }
        Command::Report => {
            let features = featurize(&cfg, cli.opts.features.as_deref())?;
            let results = results_for(&features, &cfg)?;
            print_metrics(&results);
            let files = render_report(&results, &cfg.to_toml(), export_options(&cfg)).stage("report")?;
            write_files(&files, &cfg.out).stage("report").map(print_paths)
        }
        Command::Run => {
            let features = featurize(&cfg, cli.opts.features.as_deref())?;
            let summary = run_from_features(&features, &cfg).stage("run")?;
            let results: Vec<MethodResult> = summary.fits.iter().map(|f| f.result.clone()).collect();
            print_metrics(&results);
            info!(
                "{} windows, {} skipped, {} report files, {} models",
                summary.windows,
                summary.skipped,
                summary.reports.len(),
                summary.models.len()
            );
            print_paths(summary.reports);
            print_paths(summary.models);
            Ok(())
        }
    }
}

fn print_paths(paths: Vec<PathBuf>) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn simulate(cfg: &RunConfig, root: &Path) -> Staged<()> {
    let truth = simulate_to_dir(&cfg.synth, root).stage("simulate")?;
    let subjects = cfg.synth.n_subjects;
    let days = subjects * cfg.synth.days_per_subject;
    println!("simulated {subjects} subjects, {days} days, {} meals into {}", truth.rows.len(), root.display());
    Ok(())
}

fn ingest(cfg: &RunConfig) -> Staged<()> {
    let index = open_dataset(&cfg.data).stage("ingest")?;
    let pre = cfg.preprocess();
    println!("subject,days,meals,windows,skipped,channels");
    let (mut meals, mut windows) = (0, 0);
    for i in 0..index.len() {
        let record = index.load(i).stage("ingest")?;
        let set = extract_meal_windows(&record, &pre).stage("preprocess")?;
        let mut channels = String::new();
        if let Some(day) = record.days.first() {
            for (kind, ts) in &day.channels {
                if ts.rate() >= 1.0 {
                    let _ = write!(channels, "{}:{}Hz ", kind.as_str(), ts.rate());
                } else {
                    let _ = write!(channels, "{}:{}s ", kind.as_str(), 1.0 / ts.rate());
                }
            }
        }
        println!(
            "{},{},{},{},{},{}",
            record.subject_id,
            record.days.len(),
            record.meals.len(),
            set.windows.len(),
            set.skipped.len(),
            channels.trim_end()
        );
        meals += record.meals.len();
        windows += set.windows.len();
    }
    info!("{} subjects, {meals} meals, {windows} usable windows", index.len());
    Ok(())
}

fn featurize(cfg: &RunConfig, from: Option<&Path>) -> Staged<Featurized> {
    let features = match from {
        Some(dir) => read_features(dir, &cfg.method.methods()).stage("featurize")?,
        None => featurize_dir(cfg).stage("featurize")?,
    };
    info!("{} windows, {} meals skipped", features.window_count(), features.skipped.len());
    Ok(features)
}

fn results_for(features: &Featurized, cfg: &RunConfig) -> Staged<Vec<MethodResult>> {
    let fits = fit_all(features, cfg).stage("fit")?;
    Ok(fits.into_iter().map(|f| f.result).collect())
}

fn write_skipped(features: &Featurized, dir: &Path) -> mealmeter_core::Result<()> {
    let mut s = String::from("subject_id,timestamp,reason\n");
    for skip in &features.skipped {
        let _ = writeln!(s, "{},{},{}", skip.meal.subject_id, format_timestamp(skip.meal.timestamp), skip.reason);
    }
    let path = dir.join("skipped_meals.csv");
    fs::write(&path, s).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn print_metrics(results: &[MethodResult]) {
    for res in results {
        let m = &res.overall.metrics;
        println!(
            "{} ({}): n_test={} carbs MAE {:.2} r {} | protein MAE {:.2} r {} | fat MAE {:.2} r {}",
            res.method,
            res.scope,
            res.overall.n_test,
            m[0].mae,
            m[0].r,
            m[1].mae,
            m[1].r,
            m[2].mae,
            m[2].r
        );
    }
}

fn predict(cfg: &RunConfig, model_path: &Path, input: Option<&Path>, features_dir: Option<&Path>) -> Staged<()> {
    let model = load_pipeline(model_path).stage("load-model")?;
    let rows = match (input, features_dir) {
        (Some(path), _) => mealmeter_core::features::read_feature_csv(path).stage("featurize")?,
        (None, Some(dir)) => feature_set(read_features(dir, &[model.spec.method]).stage("featurize")?, model.spec.method)?,
        (None, None) => {
            let scoped = RunConfig {
                method: match model.spec.method {
                    Method::MealMeter => MethodSelection::MealMeter,
                    Method::Huo => MethodSelection::Huo,
                },
                ..cfg.clone()
            };
            feature_set(featurize_dir(&scoped).stage("featurize")?, model.spec.method)?
        }
    };
    let rows = match &model.spec.subject {
        Some(s) => rows.subject_rows(s),
        None => rows,
    };
    let pred = model.predict(&rows).stage("predict")?;
    let mut s = String::from("subject_id,timestamp");
    for t in Target::ALL {
        let _ = write!(s, ",{t}_pred,{t}_raw,{t}_clamped");
    }
    s.push('\n');
    for i in 0..pred.len() {
        let _ = write!(s, "{},{}", rows.keys[i].subject_id, format_timestamp(rows.keys[i].timestamp));
        for t in Target::ALL {
            let j = t.index();
            let _ = write!(s, ",{:?},{:?},{}", pred.clamped[i][j], pred.raw[i][j], pred.was_clamped[i][j]);
        }
        s.push('\n');
    }
    let stem = model_path.file_stem().map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned());
    let name = format!("predictions_{stem}.csv");
    let paths = write_files(&[(name, s)], &cfg.out).stage("predict")?;
    info!("{} rows predicted, {} values clamped at 0", pred.len(), pred.clamped_count());
    print_paths(paths);
    Ok(())
}

fn feature_set(features: Featurized, method: Method) -> Staged<FeatureMatrix> {
    let m = match method {
        Method::MealMeter => features.mealmeter,
        Method::Huo => features.huo,
    };
    m.ok_or_else(|| Failure {
        stage: "featurize",
        error: Error::Config(format!("no {method} features")),
    })
}
