//! End-to-end experiment: ingest, split, standardize, fit every model,
//! evaluate on the held-out rows and collect every table and plot-data
//! file.
//!
//! Everything is a function of the configuration and the input bytes.
//! Nothing time- or host-dependent enters the outputs, so two runs with the
//! same configuration produce identical files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{self, Dataset, NullReport, RawTable, SchemaConfig};
use crate::eda::{self, CorrMatrix, Histogram};
use crate::error::{Error, Result};
use crate::knn::{self, KSweepResult, KnnModel};
use crate::linalg::Matrix;
use crate::linear::{
    self, CenteredProblem, FitDiagnostics, LassoSettings, LinearModel, Method, OlsInfo, OlsOptions,
    PathSettings, RegularizationPath,
};
use crate::metrics::{self, MetricScale, MetricsReport};
use crate::preprocess::{StandardizationParams, TargetScaler};

/// Models the pipeline knows how to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// OLS on raw features.
    Ols,
    /// OLS on z-scored features.
    OlsStandardized,
    Ridge,
    Lasso,
    Knn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Ols,
        ModelKind::OlsStandardized,
        ModelKind::Ridge,
        ModelKind::Lasso,
        ModelKind::Knn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ols => "ols",
            ModelKind::OlsStandardized => "ols-standardized",
            ModelKind::Ridge => "ridge",
            ModelKind::Lasso => "lasso",
            ModelKind::Knn => "knn",
        }
    }

    /// Display label used in the evaluation table.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Ols => "LR",
            ModelKind::OlsStandardized => "LR (normalized)",
            ModelKind::Ridge => "Ridge",
            ModelKind::Lasso => "LASSO",
            ModelKind::Knn => "KNN",
        }
    }

    /// Name of the coefficient table in the report.
    pub fn table_name(self) -> Option<&'static str> {
        match self {
            ModelKind::Ols => Some("linear_regression_coefficients"),
            ModelKind::OlsStandardized => Some("normalized_linear_regression_coefficients"),
            ModelKind::Ridge => Some("ridge_coefficients"),
            ModelKind::Lasso => Some("lasso_coefficients"),
            ModelKind::Knn => None,
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ols" | "lr" | "linear" => Ok(ModelKind::Ols),
            "ols-standardized" | "ols-std" | "normalized" => Ok(ModelKind::OlsStandardized),
            "ridge" => Ok(ModelKind::Ridge),
            "lasso" => Ok(ModelKind::Lasso),
            "knn" => Ok(ModelKind::Knn),
            other => Err(Error::InvalidArgument(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub input: PathBuf,
    pub schema: Option<PathBuf>,
    pub test_fraction: f64,
    pub seed: u64,
    pub models: Vec<ModelKind>,
    /// Penalty for the single ridge/LASSO fits; `None` means λ_max·10⁻².
    pub lambda: Option<f64>,
    pub grid_size: usize,
    pub lambda_min_ratio: f64,
    pub k_max: usize,
    /// Fit ridge and LASSO (and their paths) on z-scored features.
    pub standardize_features: bool,
    /// Fit the standardized-feature regressors against a z-scored target.
    pub standardize_target: bool,
    pub drop_nulls: bool,
    pub bins: usize,
    pub lasso: LassoSettings,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::from("Steel_industry_data.csv"),
            schema: None,
            test_fraction: 0.25,
            seed: 42,
            models: ModelKind::ALL.to_vec(),
            lambda: None,
            grid_size: 100,
            lambda_min_ratio: 1e-4,
            k_max: 40,
            standardize_features: true,
            standardize_target: false,
            drop_nulls: false,
            bins: 30,
            lasso: LassoSettings::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Fraction of λ_max used for the single ridge/LASSO fits by default.
pub const DEFAULT_LAMBDA_FRACTION: f64 = 1e-2;

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!(
                "test fraction {} is outside (0, 1)",
                self.test_fraction
            ));
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if let Some(l) = self.lambda {
            if l < 0.0 || !l.is_finite() {
                return bad(format!("lambda must be finite and non-negative, got {l}"));
            }
        }
        if self.grid_size < 2 {
            return bad("grid size must be at least 2".into());
        }
        if !(self.lambda_min_ratio > 0.0 && self.lambda_min_ratio < 1.0) {
            return bad(format!(
                "lambda_min_ratio {} is outside (0, 1)",
                self.lambda_min_ratio
            ));
        }
        if self.bins == 0 {
            return bad("histogram bins must be at least 1".into());
        }
        if self.models.is_empty() {
            return bad("no models requested".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the configuration, excluding
    /// the output directory.
    pub fn hash(&self) -> String {
        let keyed = ExperimentConfig {
            out_dir: PathBuf::new(),
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&keyed).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn load_schema(&self) -> Result<SchemaConfig> {
        match &self.schema {
            Some(path) => SchemaConfig::from_file(path),
            None => Ok(SchemaConfig::default()),
        }
    }
}

/// Ingested, encoded and split data, ready for fitting.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub schema: SchemaConfig,
    pub table: RawTable,
    pub null_report: NullReport,
    pub dropped_null_rows: usize,
    pub data: Dataset,
    pub train: Dataset,
    pub test: Dataset,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// Reads, null-checks and encodes the input, then splits it.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let schema = config.load_schema().map_err(|e| e.in_stage("config"))?;
    let table = dataset::read_csv_file(&config.input, &schema).map_err(|e| e.in_stage("ingest"))?;
    prepare_table(config, schema, table)
}

/// As [`prepare`], from an already parsed table.
pub fn prepare_table(
    config: &ExperimentConfig,
    schema: SchemaConfig,
    table: RawTable,
) -> Result<Prepared> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let null_report = dataset::detect_nulls(&table);
    let (table, dropped_null_rows) = if config.drop_nulls {
        dataset::drop_null_rows(&table, &schema)
    } else {
        (table, 0)
    };
    let data = dataset::encode_features(&table, &schema).map_err(|e| e.in_stage("encode"))?;
    let (train_rows, test_rows) =
        dataset::split_indices(data.nrows(), config.test_fraction, config.seed)
            .map_err(|e| e.in_stage("split"))?;
    let train = data.subset(&train_rows);
    let test = data.subset(&test_rows);
    Ok(Prepared {
        schema,
        table,
        null_report,
        dropped_null_rows,
        data,
        train,
        test,
        train_rows,
        test_rows,
    })
}

/// A fitted linear regressor together with the transforms it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedRegressor {
    pub kind: ModelKind,
    pub feature_names: Vec<String>,
    pub model: LinearModel,
    /// Applied to raw features before `model`.
    pub feature_scaler: Option<StandardizationParams>,
    /// `model` predicts z-scores of the target when set.
    pub target_scaler: Option<TargetScaler>,
    pub ols_info: Option<OlsInfo>,
    pub diagnostics: Option<FitDiagnostics>,
}

impl FittedRegressor {
    fn design(&self, raw: &Matrix) -> Result<Matrix> {
        match &self.feature_scaler {
            Some(s) => s.transform(raw),
            None => Ok(raw.clone()),
        }
    }

    /// Predictions on the model's own target scale.
    pub fn predict_model_scale(&self, raw: &Matrix) -> Result<Vec<f64>> {
        self.model.predict(&self.design(raw)?)
    }

    /// Predictions in kWh.
    pub fn predict(&self, raw: &Matrix) -> Result<Vec<f64>> {
        let z = self.predict_model_scale(raw)?;
        Ok(match &self.target_scaler {
            Some(t) => t.unscale(&z),
            None => z,
        })
    }
}

/// KNN classifier plus the feature transform it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedKnn {
    pub feature_names: Vec<String>,
    /// Encoded-feature column excluded from the distance (the label itself).
    pub excluded_feature: Option<usize>,
    pub feature_scaler: StandardizationParams,
    pub k: usize,
    pub model: KnnModel,
}

impl FittedKnn {
    fn design(&self, raw: &Matrix) -> Result<Matrix> {
        let x = match self.excluded_feature {
            Some(j) if j < raw.ncols() => raw.drop_column(j),
            Some(_) => {
                return Err(Error::DimensionMismatch {
                    expected: self.feature_names.len() + 1,
                    actual: raw.ncols(),
                })
            }
            None => raw.clone(),
        };
        self.feature_scaler.transform(&x)
    }

    pub fn predict(&self, raw: &Matrix) -> Result<Vec<u32>> {
        self.model.predict_batch(&self.design(raw)?, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrainedModel {
    Linear(FittedRegressor),
    Knn(FittedKnn),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Linear(r) => r.kind,
            TrainedModel::Knn(_) => ModelKind::Knn,
        }
    }

    /// Scores the model on a dataset with the same encoding it was fit on.
    pub fn evaluate(&self, data: &Dataset) -> Result<Vec<MetricsReport>> {
        let label = self.kind().label();
        match self {
            TrainedModel::Linear(r) => {
                let pred = r.predict(data.x())?;
                let mut out = vec![MetricsReport::regression(
                    label,
                    MetricScale::Kwh,
                    data.y(),
                    &pred,
                )?];
                if let Some(t) = &r.target_scaler {
                    let z = r.predict_model_scale(data.x())?;
                    out.push(MetricsReport::regression(
                        label,
                        MetricScale::StandardizedTarget,
                        &t.scale(data.y()),
                        &z,
                    )?);
                }
                Ok(out)
            }
            TrainedModel::Knn(k) => {
                let pred = k.predict(data.x())?;
                Ok(vec![MetricsReport::classification(
                    label,
                    data.labels(),
                    &pred,
                )?])
            }
        }
    }
}

/// Design matrix and target used by the penalized fits for this config.
struct PenalizedDesign {
    x: Matrix,
    y: Vec<f64>,
    feature_scaler: Option<StandardizationParams>,
    target_scaler: Option<TargetScaler>,
}

fn penalized_design(
    train: &Dataset,
    standardize_x: bool,
    standardize_y: bool,
) -> Result<PenalizedDesign> {
    let feature_scaler = if standardize_x {
        Some(crate::preprocess::fit_standardizer(train)?)
    } else {
        None
    };
    let x = match &feature_scaler {
        Some(s) => s.transform(train.x())?,
        None => train.x().clone(),
    };
    let target_scaler = if standardize_y {
        Some(TargetScaler::fit(train.y())?)
    } else {
        None
    };
    let y = match &target_scaler {
        Some(t) => t.scale(train.y()),
        None => train.y().to_vec(),
    };
    Ok(PenalizedDesign {
        x,
        y,
        feature_scaler,
        target_scaler,
    })
}

/// Fits one regressor on the training split.
///
/// Raw OLS uses the minimum-norm solution when the encoded features are
/// collinear (the seven day indicators sum to one, and week status equals
/// Saturday + Sunday), so the identifiable coefficients are still reported.
pub fn fit_regressor(
    kind: ModelKind,
    train: &Dataset,
    config: &ExperimentConfig,
) -> Result<FittedRegressor> {
    let options = OlsOptions::minimum_norm();
    let names = train.feature_names().to_vec();
    let (design, lambda) = match kind {
        ModelKind::Ols => (penalized_design(train, false, false)?, 0.0),
        ModelKind::OlsStandardized => (
            penalized_design(train, true, config.standardize_target)?,
            0.0,
        ),
        ModelKind::Ridge | ModelKind::Lasso => {
            let d = penalized_design(
                train,
                config.standardize_features,
                config.standardize_target,
            )?;
            let lambda = match config.lambda {
                Some(l) => l,
                None => linear::lambda_max(&d.x, &d.y)? * DEFAULT_LAMBDA_FRACTION,
            };
            (d, lambda)
        }
        ModelKind::Knn => {
            return Err(Error::InvalidArgument("knn is not a regressor".into()));
        }
    };
    let (mut model, ols_info, diagnostics) = match kind {
        ModelKind::Ols | ModelKind::OlsStandardized => {
            let (m, info) = linear::fit_ols_with(&design.x, &design.y, &options)?;
            (m, Some(info), None)
        }
        ModelKind::Ridge => (
            linear::fit_ridge_with(&design.x, &design.y, lambda, &options)?,
            None,
            None,
        ),
        ModelKind::Lasso => {
            let (m, d) = linear::fit_lasso(&design.x, &design.y, lambda, &config.lasso)?;
            (m, None, Some(d))
        }
        ModelKind::Knn => unreachable!(),
    };
    model.standardized = design.feature_scaler.is_some();
    Ok(FittedRegressor {
        kind,
        feature_names: names,
        model,
        feature_scaler: design.feature_scaler,
        target_scaler: design.target_scaler,
        ols_info,
        diagnostics,
    })
}

/// Standardized KNN features (label column removed) for train and test.
fn knn_design(train: &Dataset) -> Result<(Matrix, Vec<String>, StandardizationParams)> {
    let (x, names) = train.knn_features();
    let scaler = StandardizationParams::fit(&x)?;
    Ok((scaler.transform(&x)?, names, scaler))
}

/// Runs the k sweep on the test split and refits nothing: KNN is lazy, the
/// returned model simply carries the best k.
pub fn fit_knn_with_sweep(
    train: &Dataset,
    test: &Dataset,
    k_max: usize,
) -> Result<(FittedKnn, KSweepResult)> {
    let (x, names, scaler) = knn_design(train)?;
    let model = knn::fit_knn(&x, train.labels())?;
    let (test_raw, _) = test.knn_features();
    let test_x = scaler.transform(&test_raw)?;
    let sweep = knn::k_sweep(&model, &test_x, test.labels(), k_max)?;
    let fitted = FittedKnn {
        feature_names: names,
        excluded_feature: train.label_feature(),
        feature_scaler: scaler,
        k: sweep.best_k,
        model,
    };
    Ok((fitted, sweep))
}

pub fn train_model(
    kind: ModelKind,
    prepared: &Prepared,
    config: &ExperimentConfig,
) -> Result<TrainedModel> {
    match kind {
        ModelKind::Knn => {
            let (knn, _) = fit_knn_with_sweep(&prepared.train, &prepared.test, config.k_max)?;
            Ok(TrainedModel::Knn(knn))
        }
        other => Ok(TrainedModel::Linear(fit_regressor(
            other,
            &prepared.train,
            config,
        )?)),
    }
}

/// Ridge or LASSO path on the same design as the single penalized fits.
pub fn compute_path(
    method: Method,
    train: &Dataset,
    config: &ExperimentConfig,
) -> Result<RegularizationPath> {
    let d = penalized_design(
        train,
        config.standardize_features,
        config.standardize_target,
    )?;
    let problem = CenteredProblem::new(&d.x, &d.y)?;
    let settings = PathSettings {
        grid_size: config.grid_size,
        lambda_min_ratio: config.lambda_min_ratio,
        ridge_lambda_hi: None,
        lasso: config.lasso,
    };
    linear::path_from_problem(&problem, method, &settings)
}

/// Plot data for the exploratory figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdaSummary {
    pub null_report: NullReport,
    pub histograms: Vec<Histogram>,
    pub correlation: CorrMatrix,
    /// Features ordered by |r| against the target, strongest first.
    pub target_correlation_ranking: Vec<(String, f64)>,
}

pub fn explore(prepared: &Prepared, bins: usize) -> Result<EdaSummary> {
    let target = prepared.schema.target().to_string();
    let histograms = eda::dataset_histograms(&prepared.data, &target, bins)?;
    let correlation = eda::correlation_matrix(&prepared.data, &target, true);
    let mut ranking: Vec<(String, f64)> = prepared
        .data
        .feature_names()
        .iter()
        .filter_map(|f| correlation.get(f, &target).map(|r| (f.clone(), r)))
        .collect();
    ranking.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
    Ok(EdaSummary {
        null_report: prepared.null_report.clone(),
        histograms,
        correlation,
        target_correlation_ranking: ranking,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub feature: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub name: String,
    pub model: ModelKind,
    pub method: Method,
    pub lambda: f64,
    pub standardized_features: bool,
    pub standardized_target: bool,
    pub intercept: f64,
    pub rows: Vec<CoefficientRow>,
    pub ols_info: Option<OlsInfo>,
    pub diagnostics: Option<FitDiagnostics>,
}

impl CoefficientTable {
    pub fn from_regressor(r: &FittedRegressor) -> Self {
        Self {
            name: r.kind.table_name().unwrap_or("coefficients").to_string(),
            model: r.kind,
            method: r.model.method,
            lambda: r.model.lambda,
            standardized_features: r.feature_scaler.is_some(),
            standardized_target: r.target_scaler.is_some(),
            intercept: r.model.intercept,
            rows: r
                .feature_names
                .iter()
                .zip(&r.model.coefficients)
                .map(|(f, v)| CoefficientRow {
                    feature: f.clone(),
                    value: *v,
                })
                .collect(),
            ols_info: r.ols_info,
            diagnostics: r.diagnostics.clone(),
        }
    }

    /// Features ordered by |coefficient|, largest first.
    pub fn ranked(&self) -> Vec<&CoefficientRow> {
        let mut rows: Vec<&CoefficientRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.value.abs().total_cmp(&a.value.abs()));
        rows
    }

    pub fn value(&self, feature: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.feature == feature)
            .map(|r| r.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input: PathBuf,
    pub seed: u64,
    pub test_fraction: f64,
    pub config_hash: String,
    pub dataset_rows: usize,
    pub dropped_null_rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub feature_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnSummary {
    pub k_max: usize,
    pub best_k: usize,
    pub best_error_rate: f64,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub provenance: Provenance,
    pub features: Vec<String>,
    pub coefficient_tables: Vec<CoefficientTable>,
    pub model_evaluation: Vec<MetricsReport>,
    pub knn: Option<KnnSummary>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn table(&self, kind: ModelKind) -> Option<&CoefficientTable> {
        self.coefficient_tables.iter().find(|t| t.model == kind)
    }

    pub fn metrics(&self, kind: ModelKind, scale: MetricScale) -> Option<&MetricsReport> {
        self.model_evaluation
            .iter()
            .find(|m| m.model == kind.label() && m.scale == scale)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Side-by-side coefficient CSV: `feature` then one column per model.
    pub fn coefficients_csv(&self) -> String {
        let mut out = String::from("feature");
        for t in &self.coefficient_tables {
            out.push(',');
            out.push_str(t.model.name());
        }
        out.push('\n');
        out.push_str("(intercept)");
        for t in &self.coefficient_tables {
            out.push_str(&format!(",{}", t.intercept));
        }
        out.push('\n');
        for (i, f) in self.features.iter().enumerate() {
            out.push_str(&eda::csv_field(f));
            for t in &self.coefficient_tables {
                out.push_str(&format!(",{}", t.rows[i].value));
            }
            out.push('\n');
        }
        out
    }
}

/// Named output files, in write order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_slice())
    }

    /// Writes every file into `dir`. If any write fails, the files written
    /// so far are removed again.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Err(e) = std::fs::write(&path, contents) {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                return Err(Error::io(path, e).in_stage("write"));
            }
            written.push(path);
        }
        Ok(written)
    }
}

pub fn null_counts_csv(report: &NullReport) -> String {
    let mut out = String::from("column,nulls\n");
    for c in &report.columns {
        out.push_str(&format!("{},{}\n", eda::csv_field(&c.column), c.nulls));
    }
    out
}

/// Exploratory outputs: null report, histograms and correlation matrix.
pub fn eda_artifacts(summary: &EdaSummary, out: &mut Artifacts) -> Result<()> {
    out.add("null_report.json", to_json(&summary.null_report)?);
    out.add("null_counts.csv", null_counts_csv(&summary.null_report));
    out.add(
        "histograms.csv",
        eda::histograms_to_csv(&summary.histograms),
    );
    out.add("correlation.csv", summary.correlation.to_csv());
    out.add("eda_summary.json", to_json(summary)?);
    Ok(())
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

const NOTES: [&str; 5] = [
    "Accuracy Score is R² for regressors and the match fraction for KNN.",
    "KNN error metrics score the ordinal load-type ids (Light=0, Medium=1, Maximum=2) as numbers.",
    "Raw OLS uses the minimum-norm solution: the seven day indicators sum to one and week status equals Saturday + Sunday, so three day-related directions are not identifiable.",
    "Penalized objectives carry no 1/(2n) factor; lambda here equals 2n times the per-sample penalty used by common toolkits.",
    "The KNN k is chosen by the sweep over the test split.",
];

/// Runs the full experiment and returns the report plus every output file.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<(ExperimentReport, Artifacts)> {
    let prepared = prepare(config)?;
    run_prepared(config, &prepared)
}

pub fn run_prepared(
    config: &ExperimentConfig,
    prepared: &Prepared,
) -> Result<(ExperimentReport, Artifacts)> {
    let mut artifacts = Artifacts::default();
    let summary = explore(prepared, config.bins).map_err(|e| e.in_stage("eda"))?;
    eda_artifacts(&summary, &mut artifacts)?;

    let mut models: Vec<ModelKind> = config.models.clone();
    models.sort();
    models.dedup();

    let mut tables = Vec::new();
    let mut evaluation = Vec::new();
    let mut knn_summary = None;
    for kind in models {
        match kind {
            ModelKind::Knn => {
                let (knn, sweep) =
                    fit_knn_with_sweep(&prepared.train, &prepared.test, config.k_max)
                        .map_err(|e| e.in_stage("knn"))?;
                let trained = TrainedModel::Knn(knn);
                evaluation.extend(
                    trained
                        .evaluate(&prepared.test)
                        .map_err(|e| e.in_stage("evaluate"))?,
                );
                let TrainedModel::Knn(knn) = trained else {
                    unreachable!()
                };
                artifacts.add("knn_sweep.csv", sweep.to_csv());
                artifacts.add("knn_sweep.json", to_json(&sweep)?);
                knn_summary = Some(KnnSummary {
                    k_max: config.k_max,
                    best_k: sweep.best_k,
                    best_error_rate: sweep.best_error_rate(),
                    features: knn.feature_names,
                });
            }
            other => {
                let fitted =
                    fit_regressor(other, &prepared.train, config).map_err(|e| e.in_stage("fit"))?;
                tables.push(CoefficientTable::from_regressor(&fitted));
                let trained = TrainedModel::Linear(fitted);
                evaluation.extend(
                    trained
                        .evaluate(&prepared.test)
                        .map_err(|e| e.in_stage("evaluate"))?,
                );
                if let Some(method) = match other {
                    ModelKind::Ridge => Some(Method::Ridge),
                    ModelKind::Lasso => Some(Method::Lasso),
                    _ => None,
                } {
                    let path = compute_path(method, &prepared.train, config)
                        .map_err(|e| e.in_stage("path"))?;
                    artifacts.add(
                        &format!("path_{method}.csv"),
                        path.to_csv(prepared.train.feature_names()),
                    );
                }
            }
        }
    }

    let report = ExperimentReport {
        provenance: Provenance {
            input: config.input.clone(),
            seed: config.seed,
            test_fraction: config.test_fraction,
            config_hash: config.hash(),
            dataset_rows: prepared.data.nrows(),
            dropped_null_rows: prepared.dropped_null_rows,
            train_rows: prepared.train.nrows(),
            test_rows: prepared.test.nrows(),
            feature_count: prepared.data.nfeatures(),
        },
        features: prepared.data.feature_names().to_vec(),
        coefficient_tables: tables,
        model_evaluation: evaluation,
        knn: knn_summary,
        notes: NOTES.iter().map(|s| s.to_string()).collect(),
    };
    artifacts.add("coefficients.csv", report.coefficients_csv());
    artifacts.add(
        "model_evaluation.txt",
        metrics::evaluation_table(&report.model_evaluation),
    );
    artifacts.add("model_evaluation.json", to_json(&report.model_evaluation)?);
    artifacts.add("report.json", report.to_json()?);
    Ok((report, artifacts))
}

/// Runs the pipeline and writes all outputs into `config.out_dir`.
pub fn run_pipeline_to_disk(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let (report, artifacts) = run_pipeline(config)?;
    artifacts.write_to(&config.out_dir)?;
    Ok(report)
}
