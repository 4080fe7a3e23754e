//! Z-score standardization, `(x - mean) / std` with the population
//! standard deviation, fitted on training rows only.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Set exactly where `stds[j] == 0`.
    pub constant: Vec<bool>,
}

impl StandardizationParams {
    pub fn nfeatures(&self) -> usize {
        self.means.len()
    }

    pub fn fit(x: &Matrix) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::Empty("cannot fit a standardizer on zero rows"));
        }
        let p = x.ncols();
        let mut means = vec![0.0; p];
        for row in x.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        let mut ss = vec![0.0; p];
        for row in x.rows() {
            for ((s, v), m) in ss.iter_mut().zip(row).zip(&means) {
                let d = v - m;
                *s += d * d;
            }
        }
        let stds: Vec<f64> = ss.iter().map(|s| (s / n as f64).sqrt()).collect();
        let constant = stds.iter().map(|&s| s == 0.0).collect();
        Ok(Self {
            means,
            stds,
            constant,
        })
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.ncols() != self.nfeatures() {
            return Err(Error::DimensionMismatch {
                expected: self.nfeatures(),
                actual: x.ncols(),
            });
        }
        let mut out = x.clone();
        for i in 0..out.nrows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = if self.constant[j] {
                    0.0
                } else {
                    (*v - self.means[j]) / self.stds[j]
                };
            }
        }
        Ok(out)
    }

    /// Maps coefficients fitted on standardized features back to the raw
    /// feature scale: `(intercept, slopes)`.
    pub fn unscale_coefficients(&self, intercept: f64, coefs: &[f64]) -> (f64, Vec<f64>) {
        let mut b0 = intercept;
        let raw: Vec<f64> = coefs
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                if self.constant[j] {
                    0.0
                } else {
                    let r = b / self.stds[j];
                    b0 -= r * self.means[j];
                    r
                }
            })
            .collect();
        (b0, raw)
    }
}

/// Fits standardization parameters on the training features.
pub fn fit_standardizer(train: &Dataset) -> Result<StandardizationParams> {
    let params = StandardizationParams::fit(train.x())?;
    for (name, _) in train
        .feature_names()
        .iter()
        .zip(&params.constant)
        .filter(|(_, &c)| c)
    {
        log::warn!("feature `{name}` is constant on the training rows; it will standardize to 0");
    }
    Ok(params)
}

pub fn transform(params: &StandardizationParams, data: &Dataset) -> Result<Dataset> {
    data.with_x(params.transform(data.x())?)
}

/// Mean and population standard deviation of the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub mean: f64,
    pub std: f64,
}

impl TargetScaler {
    pub fn fit(y: &[f64]) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Empty("cannot scale an empty target"));
        }
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let std = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        if std == 0.0 {
            return Err(Error::Undefined("target has zero variance"));
        }
        Ok(Self { mean, std })
    }

    pub fn scale(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| (v - self.mean) / self.std).collect()
    }

    pub fn unscale(&self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|v| v * self.std + self.mean).collect()
    }
}
