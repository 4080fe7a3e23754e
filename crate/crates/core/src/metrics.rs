//! Regression and classification scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_pair(len_a: usize, len_b: usize) -> Result<()> {
    if len_a != len_b {
        return Err(Error::DimensionMismatch {
            expected: len_a,
            actual: len_b,
        });
    }
    if len_a == 0 {
        return Err(Error::Empty("metric over zero samples"));
    }
    Ok(())
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "metric input has non-finite values".into(),
        ))
    }
}

fn check(y: &[f64], y_hat: &[f64]) -> Result<()> {
    check_pair(y.len(), y_hat.len())?;
    check_finite(y)?;
    check_finite(y_hat)
}

/// Mean absolute error.
pub fn mae(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check(y, y_hat)?;
    let sum: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / y.len() as f64)
}

/// Mean squared error.
pub fn mse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check(y, y_hat)?;
    let sum: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / y.len() as f64)
}

pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    mse(y, y_hat).map(f64::sqrt)
}

/// Coefficient of determination, `1 - SSE/SST`. Errors when `y` is constant.
pub fn r_squared(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check(y, y_hat)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sse: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    let sst: f64 = y.iter().map(|a| (a - mean) * (a - mean)).sum();
    if sst == 0.0 {
        return Err(Error::Undefined("R² of a zero-variance target"));
    }
    Ok(1.0 - sse / sst)
}

/// Fraction of exact matches.
pub fn accuracy<T: PartialEq>(labels: &[T], predicted: &[T]) -> Result<f64> {
    check_pair(labels.len(), predicted.len())?;
    let hits = labels.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Scale the errors were measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricScale {
    Kwh,
    StandardizedTarget,
    /// Load-type ids (0, 1, 2) scored as numbers.
    OrdinalLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub scale: MetricScale,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    /// `None` when the truth has zero variance.
    pub r_squared: Option<f64>,
    pub accuracy: Option<f64>,
}

impl MetricsReport {
    pub fn regression(model: &str, scale: MetricScale, y: &[f64], y_hat: &[f64]) -> Result<Self> {
        let mse = mse(y, y_hat)?;
        Ok(Self {
            model: model.to_string(),
            scale,
            mae: mae(y, y_hat)?,
            mse,
            rmse: mse.sqrt(),
            r_squared: Some(r_squared(y, y_hat)?),
            accuracy: None,
        })
    }

    /// Match fraction plus the numeric errors on the ordinal label ids.
    pub fn classification(model: &str, labels: &[u32], predicted: &[u32]) -> Result<Self> {
        let acc = accuracy(labels, predicted)?;
        let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
        let y_hat: Vec<f64> = predicted.iter().map(|&l| l as f64).collect();
        let mse = mse(&y, &y_hat)?;
        Ok(Self {
            model: model.to_string(),
            scale: MetricScale::OrdinalLabel,
            mae: mae(&y, &y_hat)?,
            mse,
            rmse: mse.sqrt(),
            r_squared: r_squared(&y, &y_hat).ok(),
            accuracy: Some(acc),
        })
    }

    /// The "accuracy score" column: match fraction for classifiers, R² for
    /// regressors.
    pub fn accuracy_score(&self) -> Option<f64> {
        self.accuracy.or(self.r_squared)
    }
}

/// Aligned text table with one row per report.
pub fn evaluation_table(reports: &[MetricsReport]) -> String {
    let header = ["Model", "Scale", "Accuracy Score", "MAE", "MSE", "RMSE"];
    let rows: Vec<[String; 6]> = reports
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                match r.scale {
                    MetricScale::Kwh => "kWh",
                    MetricScale::StandardizedTarget => "std-target",
                    MetricScale::OrdinalLabel => "ordinal",
                }
                .to_string(),
                r.accuracy_score()
                    .map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}")),
                format!("{:.6}", r.mae),
                format!("{:.6}", r.mse),
                format!("{:.6}", r.rmse),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: &[&str], out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i < 2 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&header, &mut out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(
        &rule.iter().map(String::as_str).collect::<Vec<_>>(),
        &mut out,
    );
    for row in &rows {
        line(
            &row.iter().map(String::as_str).collect::<Vec<_>>(),
            &mut out,
        );
    }
    out
}
