//! Exploratory statistics: per-column histograms and Pearson correlation.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub column: String,
    /// `counts.len() + 1` strictly increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width histogram over `[min, max]`; the maximum lands in the last
/// bin. A constant column gets a single bin `[min, min + 1)`.
pub fn histogram(column: &str, values: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument(
            "histogram needs at least one bin".into(),
        ));
    }
    if values.is_empty() {
        return Err(Error::Empty("histogram of an empty column"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "column `{column}` has non-finite values"
        )));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if lo == hi {
        return Ok(Histogram {
            column: column.to_string(),
            edges: vec![lo, lo + 1.0],
            counts: vec![values.len()],
        });
    }
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
    edges.push(hi);
    let mut counts = vec![0usize; bins];
    for &v in values {
        let slot = ((v - lo) / width).floor() as usize;
        counts[slot.min(bins - 1)] += 1;
    }
    Ok(Histogram {
        column: column.to_string(),
        edges,
        counts,
    })
}

/// Pearson correlation by the two-pass formula; `None` when either input
/// has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson inputs differ in length");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Symmetric matrix of Pearson coefficients; undefined entries are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.values[i][j]
    }

    /// Plot-data CSV: a header row of names, then one row per variable
    /// (empty cells for undefined entries).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature");
        for n in &self.names {
            out.push(',');
            out.push_str(&csv_field(n));
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.values) {
            out.push_str(&csv_field(name));
            for v in row {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Correlations among the encoded feature columns, plus the target as the
/// last variable when `include_target` is set.
pub fn correlation_matrix(data: &Dataset, target_name: &str, include_target: bool) -> CorrMatrix {
    let mut names = data.feature_names().to_vec();
    let mut columns: Vec<Vec<f64>> = (0..data.nfeatures()).map(|j| data.x().column(j)).collect();
    if include_target {
        names.push(target_name.to_string());
        columns.push(data.y().to_vec());
    }
    correlation_of_columns(names, &columns)
}

pub fn correlation_of_columns(names: Vec<String>, columns: &[Vec<f64>]) -> CorrMatrix {
    let m = columns.len();
    let mut values = vec![vec![None; m]; m];
    for i in 0..m {
        for j in i..m {
            let r = if i == j {
                pearson(&columns[i], &columns[i]).map(|_| 1.0)
            } else {
                pearson(&columns[i], &columns[j])
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    CorrMatrix { names, values }
}

/// One histogram per feature column and for the target.
pub fn dataset_histograms(
    data: &Dataset,
    target_name: &str,
    bins: usize,
) -> Result<Vec<Histogram>> {
    let x: &Matrix = data.x();
    let mut out = Vec::with_capacity(data.nfeatures() + 1);
    out.push(histogram(target_name, data.y(), bins)?);
    for (j, name) in data.feature_names().iter().enumerate() {
        out.push(histogram(name, &x.column(j), bins)?);
    }
    Ok(out)
}

/// Long-format plot data: `column,bin,lower,upper,count`.
pub fn histograms_to_csv(hists: &[Histogram]) -> String {
    let mut out = String::from("column,bin,lower,upper,count\n");
    for h in hists {
        for (b, count) in h.counts.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_field(&h.column),
                b,
                h.edges[b],
                h.edges[b + 1],
                count
            ));
        }
    }
    out
}
