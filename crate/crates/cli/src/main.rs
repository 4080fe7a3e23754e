use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{ArgAction, Args, Parser, Subcommand};
use log::info;
use steelpower::linear::{LassoSettings, Method};
use steelpower::metrics::{evaluation_table, MetricsReport};
use steelpower::pipeline::{self, Artifacts, ExperimentConfig, ModelKind, Prepared, TrainedModel};
use steelpower::{Error, ErrorKind};

const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_DATA: u8 = 4;
const EXIT_NUMERIC: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "steelpower",
    version,
    about = "Steel-plant energy regression and load-type classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Null report, histograms and correlation matrix.
    Inspect(Common),
    /// Write the train/test partition as CSV.
    Split(Common),
    /// Fit models on the training split and save them as JSON.
    Train(Common),
    /// Ridge or LASSO coefficient path over a geometric λ grid.
    Path(Common),
    /// KNN test error for k = 1..=k_max.
    KnnSweep(Common),
    /// Score models on the test split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Previously trained model JSON; fits `--model` afresh when omitted.
        #[arg(long)]
        model_file: Option<PathBuf>,
    },
    /// Run the full experiment and write every output.
    Report(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long)]
    input: PathBuf,
    /// Column-role mapping (`column = role` lines).
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, default_value_t = 0.25)]
    test_fraction: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated: ols, ols-standardized, ridge, lasso, knn.
    #[arg(long, value_delimiter = ',')]
    model: Vec<ModelKind>,
    /// Penalty for single ridge/LASSO fits (default λ_max·1e-2).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 100)]
    grid_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    lambda_min_ratio: f64,
    #[arg(long, default_value_t = 40)]
    k_max: usize,
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    standardize_features: bool,
    #[arg(long, action = ArgAction::Set, default_value_t = false)]
    standardize_target: bool,
    #[arg(long)]
    drop_nulls: bool,
    #[arg(long, default_value_t = 30)]
    bins: usize,
    #[arg(long, default_value_t = LassoSettings::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = LassoSettings::default().max_iter)]
    max_iter: usize,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl Common {
    fn config(&self, default_models: &[ModelKind]) -> ExperimentConfig {
        let models = if self.model.is_empty() {
            default_models.to_vec()
        } else {
            self.model.clone()
        };
        ExperimentConfig {
            input: self.input.clone(),
            schema: self.schema.clone(),
            test_fraction: self.test_fraction,
            seed: self.seed,
            models,
            lambda: self.lambda,
            grid_size: self.grid_size,
            lambda_min_ratio: self.lambda_min_ratio,
            k_max: self.k_max,
            standardize_features: self.standardize_features,
            standardize_target: self.standardize_target,
            drop_nulls: self.drop_nulls,
            bins: self.bins,
            lasso: LassoSettings {
                tol: self.tol,
                max_iter: self.max_iter,
                ..LassoSettings::default()
            },
            out_dir: self.out_dir.clone(),
        }
    }
}

fn write(out: &Artifacts, dir: &Path) -> Result<()> {
    for path in out.write_to(dir)? {
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn inspect(config: &ExperimentConfig) -> Result<()> {
    let prepared = pipeline::prepare(config)?;
    let summary = pipeline::explore(&prepared, config.bins)?;
    let mut out = Artifacts::default();
    pipeline::eda_artifacts(&summary, &mut out)?;
    write(&out, &config.out_dir)?;
    print!("{}", pipeline::null_counts_csv(&summary.null_report));
    println!("rows: {}", summary.null_report.total_rows);
    println!("total nulls: {}", summary.null_report.total_nulls());
    Ok(())
}

fn split(config: &ExperimentConfig) -> Result<()> {
    let prepared = pipeline::prepare(config)?;
    let mut out = Artifacts::default();
    out.add(
        "train.csv",
        prepared.table.select_rows(&prepared.train_rows).to_csv()?,
    );
    out.add(
        "test.csv",
        prepared.table.select_rows(&prepared.test_rows).to_csv()?,
    );
    let indices = serde_json::json!({
        "seed": config.seed,
        "test_fraction": config.test_fraction,
        "train": prepared.train_rows,
        "test": prepared.test_rows,
    });
    out.add("split.json", serde_json::to_string_pretty(&indices)? + "\n");
    write(&out, &config.out_dir)?;
    println!("train rows: {}", prepared.train_rows.len());
    println!("test rows: {}", prepared.test_rows.len());
    Ok(())
}

fn train_all(config: &ExperimentConfig, prepared: &Prepared) -> Result<Vec<TrainedModel>> {
    let mut models = config.models.clone();
    models.sort();
    models.dedup();
    models
        .into_iter()
        .map(|kind| Ok(pipeline::train_model(kind, prepared, config)?))
        .collect()
}

fn train(config: &ExperimentConfig) -> Result<()> {
    let prepared = pipeline::prepare(config)?;
    let mut out = Artifacts::default();
    for model in train_all(config, &prepared)? {
        let name = format!("model_{}.json", model.kind().name());
        out.add(&name, serde_json::to_string_pretty(&model)? + "\n");
        match &model {
            TrainedModel::Linear(r) => {
                println!("{} (lambda = {})", model.kind().label(), r.model.lambda);
                println!("  (intercept) {}", r.model.intercept);
                for (f, b) in r.feature_names.iter().zip(&r.model.coefficients) {
                    println!("  {f} {b}");
                }
            }
            TrainedModel::Knn(k) => println!("KNN (k = {})", k.k),
        }
    }
    write(&out, &config.out_dir)
}

fn path(config: &ExperimentConfig) -> Result<()> {
    let prepared = pipeline::prepare(config)?;
    let mut out = Artifacts::default();
    for kind in &config.models {
        let method = match kind {
            ModelKind::Ridge => Method::Ridge,
            ModelKind::Lasso => Method::Lasso,
            other => anyhow::bail!(Error::InvalidArgument(format!(
                "path needs ridge or lasso, got {}",
                other.name()
            ))),
        };
        let p = pipeline::compute_path(method, &prepared.train, config)?;
        out.add(
            &format!("path_{method}.csv"),
            p.to_csv(prepared.train.feature_names()),
        );
        println!(
            "{method}: {} lambdas from {} to {}",
            p.len(),
            p.lambdas[0],
            p.lambdas[p.len() - 1]
        );
    }
    write(&out, &config.out_dir)
}

fn knn_sweep(config: &ExperimentConfig) -> Result<()> {
    let prepared = pipeline::prepare(config)?;
    let (_, sweep) = pipeline::fit_knn_with_sweep(&prepared.train, &prepared.test, config.k_max)?;
    let mut out = Artifacts::default();
    out.add("knn_sweep.csv", sweep.to_csv());
    write(&out, &config.out_dir)?;
    println!(
        "best k: {} (error rate {})",
        sweep.best_k,
        sweep.best_error_rate()
    );
    Ok(())
}

fn evaluate(config: &ExperimentConfig, model_file: Option<&Path>) -> Result<()> {
    let prepared = pipeline::prepare(config)?;
    let models = match model_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            vec![serde_json::from_str::<TrainedModel>(&text).map_err(Error::from)?]
        }
        None => train_all(config, &prepared)?,
    };
    let mut reports: Vec<MetricsReport> = Vec::new();
    for m in &models {
        reports.extend(m.evaluate(&prepared.test)?);
    }
    let mut out = Artifacts::default();
    out.add(
        "model_evaluation.json",
        serde_json::to_string_pretty(&reports)? + "\n",
    );
    out.add("model_evaluation.txt", evaluation_table(&reports));
    write(&out, &config.out_dir)?;
    print!("{}", evaluation_table(&reports));
    Ok(())
}

fn report(config: &ExperimentConfig) -> Result<()> {
    let (report, out) = pipeline::run_pipeline(config)?;
    write(&out, &config.out_dir)?;
    print!("{}", evaluation_table(&report.model_evaluation));
    if let Some(k) = &report.knn {
        println!("best k: {}", k.best_k);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Inspect(c) => inspect(&c.config(&ModelKind::ALL)),
        Command::Split(c) => split(&c.config(&ModelKind::ALL)),
        Command::Train(c) => train(&c.config(&ModelKind::ALL)),
        Command::Path(c) => path(&c.config(&[ModelKind::Ridge, ModelKind::Lasso])),
        Command::KnnSweep(c) => knn_sweep(&c.config(&[ModelKind::Knn])),
        Command::Evaluate { common, model_file } => {
            evaluate(&common.config(&ModelKind::ALL), model_file.as_deref())
        }
        Command::Report(c) => report(&c.config(&ModelKind::ALL)),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(e) => match e.kind() {
            ErrorKind::Config => EXIT_CONFIG,
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Numeric => EXIT_NUMERIC,
        },
        None => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
