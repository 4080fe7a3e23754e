//! Energy-use regression and load-type classification for steel-plant
//! interval data.
//!
//! The crate covers the whole experiment: CSV ingestion and encoding
//! ([`dataset`]), exploratory statistics ([`eda`]), z-score scaling
//! ([`preprocess`]), OLS/ridge/LASSO fits and regularization paths
//! ([`linear`]), an exact k-nearest-neighbour classifier ([`knn`]), error
//! metrics ([`metrics`]) and the orchestrating [`pipeline`].

pub mod dataset;
pub mod eda;
pub mod error;
pub mod knn;
pub mod linalg;
pub mod linear;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod synthetic;

pub use dataset::{
    detect_nulls, encode_features, parse_csv, split, ColumnRole, Dataset, NullReport, RawTable,
    SchemaConfig,
};
pub use eda::{correlation_matrix, histogram, CorrMatrix, Histogram};
pub use error::{Error, ErrorKind, Result};
pub use knn::{fit_knn, k_sweep, predict_knn, KSweepResult, KnnModel};
pub use linalg::Matrix;
pub use linear::{
    fit_lasso, fit_ols, fit_ridge, lambda_max, predict, regularization_path, soft_threshold,
    FitDiagnostics, LassoSettings, LinearModel, Method, PathSettings, RegularizationPath,
};
pub use metrics::{accuracy, mae, mse, r_squared, rmse, MetricScale, MetricsReport};
pub use pipeline::{run_pipeline, ExperimentConfig, ExperimentReport, ModelKind};
pub use preprocess::{fit_standardizer, transform, StandardizationParams};
