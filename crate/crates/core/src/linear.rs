//! Least-squares regressors: ordinary least squares, ridge and LASSO, plus
//! regularization paths.
//!
//! All three work on centered data so the intercept is never penalized:
//! `X` and `y` are centered, the slopes are solved for, and the intercept is
//! restored as `mean(y) - mean(X)·β`. The penalties use the unnormalized
//! objectives
//!
//! ```text
//! ridge:  Σ (y - Xβ)² + λ Σ β²
//! lasso:  Σ (y - Xβ)² + λ Σ |β|
//! ```
//!
//! with no `1/(2n)` factor. A toolkit that minimizes
//! `(1/2n) Σ (y - Xβ)² + α Σ |β|` corresponds to `λ = 2n·α` here.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix, SymmetricEigen};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ols,
    Ridge,
    Lasso,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Ols => "ols",
            Method::Ridge => "ridge",
            Method::Lasso => "lasso",
        })
    }
}

/// Fitted linear predictor `ŷ = intercept + x·coefficients`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub method: Method,
    pub lambda: f64,
    /// Whether the features were standardized before fitting.
    pub standardized: bool,
}

impl LinearModel {
    pub fn nfeatures(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        predict(self, x)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|b| b.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coefficients.iter().map(|b| b * b).sum::<f64>().sqrt()
    }
}

pub fn predict(model: &LinearModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.ncols() != model.nfeatures() {
        return Err(Error::DimensionMismatch {
            expected: model.nfeatures(),
            actual: x.ncols(),
        });
    }
    Ok(x.rows()
        .map(|row| model.intercept + crate::linalg::dot(row, &model.coefficients))
        .collect())
}

/// Centered sufficient statistics of a least-squares problem.
#[derive(Debug, Clone)]
pub struct CenteredProblem {
    pub x_means: Vec<f64>,
    pub y_mean: f64,
    /// `Xcᵀ Xc`
    pub gram: Matrix,
    /// `Xcᵀ yc`
    pub xty: Vec<f64>,
    /// `ycᵀ yc`
    pub yty: f64,
}

impl CenteredProblem {
    pub fn new(x: &Matrix, y: &[f64]) -> Result<Self> {
        let (n, p) = (x.nrows(), x.ncols());
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: y.len(),
            });
        }
        if n == 0 {
            return Err(Error::Empty("regression on zero rows"));
        }
        if p == 0 {
            return Err(Error::Empty("regression with no features"));
        }
        if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "regression inputs contain non-finite values".into(),
            ));
        }
        let mut x_means = vec![0.0; p];
        for row in x.rows() {
            for (m, v) in x_means.iter_mut().zip(row) {
                *m += v;
            }
        }
        x_means.iter_mut().for_each(|m| *m /= n as f64);
        let y_mean = y.iter().sum::<f64>() / n as f64;

        let mut gram = Matrix::zeros(p, p);
        let mut xty = vec![0.0; p];
        let mut yty = 0.0;
        let mut centered = vec![0.0; p];
        for (row, &yi) in x.rows().zip(y) {
            for ((c, v), m) in centered.iter_mut().zip(row).zip(&x_means) {
                *c = v - m;
            }
            let yc = yi - y_mean;
            yty += yc * yc;
            for j in 0..p {
                let cj = centered[j];
                xty[j] += cj * yc;
                for k in j..p {
                    gram[(j, k)] += cj * centered[k];
                }
            }
        }
        for j in 0..p {
            for k in 0..j {
                gram[(j, k)] = gram[(k, j)];
            }
        }
        Ok(Self {
            x_means,
            y_mean,
            gram,
            xty,
            yty,
        })
    }

    pub fn nfeatures(&self) -> usize {
        self.xty.len()
    }

    fn model(&self, coefficients: Vec<f64>, method: Method, lambda: f64) -> LinearModel {
        let shift: f64 = self
            .x_means
            .iter()
            .zip(&coefficients)
            .map(|(m, b)| m * b)
            .sum();
        LinearModel {
            intercept: self.y_mean - shift,
            coefficients,
            method,
            lambda,
            standardized: false,
        }
    }

    /// `Σ (yc - Xc β)²` from the Gram form.
    pub fn rss(&self, beta: &[f64]) -> f64 {
        let g = self.gram.matvec(beta).expect("length matches");
        let quad: f64 = beta.iter().zip(&g).map(|(b, gb)| b * gb).sum();
        let lin: f64 = beta.iter().zip(&self.xty).map(|(b, c)| b * c).sum();
        self.yty - 2.0 * lin + quad
    }

    /// `2·max_j |x_jᵀ yc|`, the smallest LASSO penalty with an all-zero fit.
    pub fn lambda_max(&self) -> f64 {
        2.0 * self.xty.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// What to do when the normal equations are (numerically) singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collinearity {
    /// Fail with [`Error::IllConditioned`].
    Reject,
    /// Return the minimum-norm least-squares solution in the
    /// column-equilibrated coordinates, dropping null directions.
    MinimumNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsOptions {
    pub collinearity: Collinearity,
    /// Reciprocal condition number of the equilibrated Gram matrix below
    /// which the system counts as singular.
    pub rcond_threshold: f64,
}

impl Default for OlsOptions {
    fn default() -> Self {
        Self {
            collinearity: Collinearity::Reject,
            rcond_threshold: 1e-12,
        }
    }
}

impl OlsOptions {
    pub fn minimum_norm() -> Self {
        Self {
            collinearity: Collinearity::MinimumNorm,
            ..Self::default()
        }
    }
}

/// Conditioning facts about an OLS solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsInfo {
    pub rcond: f64,
    pub rank: usize,
    pub minimum_norm: bool,
}

/// Ordinary least squares with the default (rejecting) options.
pub fn fit_ols(x: &Matrix, y: &[f64]) -> Result<LinearModel> {
    fit_ols_with(x, y, &OlsOptions::default()).map(|(m, _)| m)
}

pub fn fit_ols_with(x: &Matrix, y: &[f64], options: &OlsOptions) -> Result<(LinearModel, OlsInfo)> {
    let problem = CenteredProblem::new(x, y)?;
    solve_ols(&problem, options)
}

/// Solves the centered normal equations `G β = Xcᵀyc`.
///
/// Columns are first scaled to unit norm so that the conditioning check
/// measures collinearity rather than differences in units. A well
/// conditioned system is solved by Cholesky; a singular one is rejected or
/// solved in the minimum-norm sense, depending on `options`.
pub fn solve_ols(
    problem: &CenteredProblem,
    options: &OlsOptions,
) -> Result<(LinearModel, OlsInfo)> {
    let p = problem.nfeatures();
    let scale: Vec<f64> = (0..p).map(|j| problem.gram[(j, j)].sqrt()).collect();
    let active: Vec<usize> = (0..p).filter(|&j| scale[j] > 0.0).collect();
    let dropped = p - active.len();
    if dropped > 0 && options.collinearity == Collinearity::Reject {
        return Err(Error::IllConditioned { rcond: 0.0 });
    }
    let mut beta = vec![0.0; p];
    if active.is_empty() {
        let info = OlsInfo {
            rcond: 0.0,
            rank: 0,
            minimum_norm: true,
        };
        return Ok((problem.model(beta, Method::Ols, 0.0), info));
    }

    let m = active.len();
    let mut s = Matrix::zeros(m, m);
    let mut rhs = vec![0.0; m];
    for (a, &j) in active.iter().enumerate() {
        rhs[a] = problem.xty[j] / scale[j];
        for (b, &k) in active.iter().enumerate() {
            s[(a, b)] = problem.gram[(j, k)] / (scale[j] * scale[k]);
        }
    }
    let eig = SymmetricEigen::new(&s)?;
    let rcond = eig.reciprocal_condition();

    let well_posed = dropped == 0 && rcond >= options.rcond_threshold;
    let (z, rank, minimum_norm) = match (well_posed, options.collinearity) {
        (true, _) => match Cholesky::new(&s).and_then(|c| c.solve(&rhs)) {
            Ok(z) => (z, m, false),
            Err(_) if options.collinearity == Collinearity::MinimumNorm => {
                let (z, rank) = eig.pseudo_solve(&rhs, options.rcond_threshold);
                (z, rank, true)
            }
            Err(_) => return Err(Error::IllConditioned { rcond }),
        },
        (false, Collinearity::Reject) => return Err(Error::IllConditioned { rcond }),
        (false, Collinearity::MinimumNorm) => {
            let (z, rank) = eig.pseudo_solve(&rhs, options.rcond_threshold);
            (z, rank, true)
        }
    };
    for (a, &j) in active.iter().enumerate() {
        beta[j] = z[a] / scale[j];
    }
    let info = OlsInfo {
        rcond,
        rank,
        minimum_norm,
    };
    Ok((problem.model(beta, Method::Ols, 0.0), info))
}

/// Ridge regression, `β = (XcᵀXc + λI)⁻¹ Xcᵀyc`. At `λ = 0` this is
/// [`fit_ols`] and inherits its singularity check.
pub fn fit_ridge(x: &Matrix, y: &[f64], lambda: f64) -> Result<LinearModel> {
    fit_ridge_with(x, y, lambda, &OlsOptions::default())
}

pub fn fit_ridge_with(
    x: &Matrix,
    y: &[f64],
    lambda: f64,
    options: &OlsOptions,
) -> Result<LinearModel> {
    let problem = CenteredProblem::new(x, y)?;
    solve_ridge(&problem, lambda, options)
}

pub fn solve_ridge(
    problem: &CenteredProblem,
    lambda: f64,
    options: &OlsOptions,
) -> Result<LinearModel> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ridge penalty must be a finite non-negative number, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        let (mut model, _) = solve_ols(problem, options)?;
        model.method = Method::Ridge;
        return Ok(model);
    }
    let p = problem.nfeatures();
    // Symmetric diagonal scaling keeps the factorization accurate when the
    // feature units differ by many orders of magnitude.
    let scale: Vec<f64> = (0..p)
        .map(|j| (problem.gram[(j, j)] + lambda).sqrt())
        .collect();
    let mut a = Matrix::zeros(p, p);
    for j in 0..p {
        for k in 0..p {
            let mut v = problem.gram[(j, k)];
            if j == k {
                v += lambda;
            }
            a[(j, k)] = v / (scale[j] * scale[k]);
        }
    }
    let rhs: Vec<f64> = (0..p).map(|j| problem.xty[j] / scale[j]).collect();
    let z = Cholesky::new(&a)?.solve(&rhs)?;
    let beta = z.iter().zip(&scale).map(|(z, s)| z / s).collect();
    Ok(problem.model(beta, Method::Ridge, lambda))
}

/// `sign(v) · max(|v| - gamma, 0)`.
pub fn soft_threshold(v: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    if v > gamma {
        v - gamma
    } else if v < -gamma {
        v + gamma
    } else {
        0.0
    }
}

/// Smallest λ at which the LASSO solution is identically zero.
pub fn lambda_max(x: &Matrix, y: &[f64]) -> Result<f64> {
    Ok(CenteredProblem::new(x, y)?.lambda_max())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoSettings {
    /// Stop once no coordinate moves by more than this in a sweep...
    pub tol: f64,
    pub max_iter: usize,
    /// ...and the subgradient optimality conditions hold to this accuracy.
    pub kkt_tol: f64,
}

impl Default for LassoSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 10_000,
            kkt_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Full coordinate sweeps performed.
    pub iterations: usize,
    pub max_change: f64,
    pub converged: bool,
    /// Objective at the returned coefficients.
    pub objective: f64,
    pub max_kkt_violation: f64,
    /// Objective after each sweep, for monotonicity checks.
    #[serde(skip)]
    pub objective_history: Vec<f64>,
}

/// LASSO by cyclic coordinate descent, starting from zero.
pub fn fit_lasso(
    x: &Matrix,
    y: &[f64],
    lambda: f64,
    settings: &LassoSettings,
) -> Result<(LinearModel, FitDiagnostics)> {
    let problem = CenteredProblem::new(x, y)?;
    solve_lasso(&problem, lambda, settings, None)
}

/// `Σ (yc - Xc β)² + λ Σ |β|`
pub fn lasso_objective(problem: &CenteredProblem, beta: &[f64], lambda: f64) -> f64 {
    problem.rss(beta) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Largest violation of the LASSO optimality conditions
/// `|2 x_jᵀr| ≤ λ` (β_j = 0) and `2 x_jᵀr = λ·sign(β_j)` (β_j ≠ 0).
pub fn kkt_violation(problem: &CenteredProblem, beta: &[f64], lambda: f64) -> f64 {
    let g = problem.gram.matvec(beta).expect("length matches");
    (0..beta.len())
        .map(|j| {
            let grad = 2.0 * (problem.xty[j] - g[j]);
            if beta[j] == 0.0 {
                (grad.abs() - lambda).max(0.0)
            } else {
                (grad - lambda * beta[j].signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Coordinate descent over the covariance form of the problem.
///
/// Each sweep visits coordinates in ascending order and sets
/// `β_j ← S(ρ_j, λ/2) / z_j` with `z_j = ‖x_j‖²` and
/// `ρ_j = x_jᵀ(yc - Σ_{k≠j} x_k β_k) = (Xcᵀyc)_j - (Gβ)_j + z_j β_j`.
/// Every update exactly minimizes the objective along one coordinate, so
/// the objective never increases. Columns with `z_j = 0` stay at zero.
pub fn solve_lasso(
    problem: &CenteredProblem,
    lambda: f64,
    settings: &LassoSettings,
    warm_start: Option<&[f64]>,
) -> Result<(LinearModel, FitDiagnostics)> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lasso penalty must be a finite non-negative number, got {lambda}"
        )));
    }
    if settings.tol <= 0.0 || settings.tol.is_nan() || settings.max_iter == 0 {
        return Err(Error::InvalidArgument(
            "lasso needs tol > 0 and max_iter > 0".into(),
        ));
    }
    let p = problem.nfeatures();
    let gram = &problem.gram;
    let mut beta = match warm_start {
        Some(w) if w.len() == p => w.to_vec(),
        Some(w) => {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: w.len(),
            })
        }
        None => vec![0.0; p],
    };
    for j in 0..p {
        if gram[(j, j)] == 0.0 {
            beta[j] = 0.0;
        }
    }
    let half = lambda / 2.0;
    let mut g = gram.matvec(&beta)?;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut max_change = f64::INFINITY;
    let mut kkt = f64::INFINITY;
    let mut converged = false;

    while iterations < settings.max_iter {
        iterations += 1;
        max_change = 0.0f64;
        for j in 0..p {
            let z = gram[(j, j)];
            if z == 0.0 {
                continue;
            }
            let old = beta[j];
            let rho = problem.xty[j] - g[j] + z * old;
            let new = soft_threshold(rho, half) / z;
            let delta = new - old;
            if delta != 0.0 {
                beta[j] = new;
                for (k, gk) in g.iter_mut().enumerate() {
                    *gk += gram[(k, j)] * delta;
                }
                max_change = max_change.max(delta.abs());
            }
        }
        // refresh to keep rounding from accumulating in Gβ
        g = gram.matvec(&beta)?;
        history.push(lasso_objective(problem, &beta, lambda));
        if max_change < settings.tol {
            kkt = kkt_violation(problem, &beta, lambda);
            if kkt <= settings.kkt_tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        kkt = kkt_violation(problem, &beta, lambda);
        log::debug!(
            "lasso at lambda={lambda:e} stopped after {iterations} sweeps without converging \
             (max change {max_change:e}, kkt {kkt:e})"
        );
    }
    let diagnostics = FitDiagnostics {
        iterations,
        max_change,
        converged,
        objective: *history.last().expect("at least one sweep"),
        max_kkt_violation: kkt,
        objective_history: history,
    };
    Ok((problem.model(beta, Method::Lasso, lambda), diagnostics))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSettings {
    pub grid_size: usize,
    pub lambda_min_ratio: f64,
    /// Largest ridge penalty; `None` anchors ridge at the LASSO λ_max.
    pub ridge_lambda_hi: Option<f64>,
    pub lasso: LassoSettings,
}

impl Default for PathSettings {
    fn default() -> Self {
        Self {
            grid_size: 100,
            lambda_min_ratio: 1e-4,
            ridge_lambda_hi: None,
            lasso: LassoSettings::default(),
        }
    }
}

/// Coefficient trajectories over a decreasing λ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizationPath {
    pub method: Method,
    pub lambdas: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    /// Per-λ solver diagnostics (LASSO only).
    pub diagnostics: Vec<FitDiagnostics>,
}

impl RegularizationPath {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Plot data: `lambda` followed by one column per feature.
    pub fn to_csv(&self, feature_names: &[String]) -> String {
        let mut out = String::from("lambda");
        for name in feature_names {
            out.push(',');
            out.push_str(&crate::eda::csv_field(name));
        }
        out.push('\n');
        for (lambda, row) in self.lambdas.iter().zip(&self.coefficients) {
            out.push_str(&lambda.to_string());
            for b in row {
                out.push(',');
                out.push_str(&b.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Geometric grid of `size` values from `hi` down to `hi · min_ratio`.
pub fn lambda_grid(hi: f64, size: usize, min_ratio: f64) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::InvalidArgument(
            "path grid needs at least 2 points".into(),
        ));
    }
    if !(min_ratio > 0.0 && min_ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda_min_ratio must lie in (0, 1), got {min_ratio}"
        )));
    }
    if hi <= 0.0 || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "path anchor lambda must be positive, got {hi}"
        )));
    }
    let step = min_ratio.ln() / (size - 1) as f64;
    Ok((0..size)
        .map(|i| {
            if i == 0 {
                hi
            } else {
                hi * (step * i as f64).exp()
            }
        })
        .collect())
}

pub fn regularization_path(
    x: &Matrix,
    y: &[f64],
    method: Method,
    settings: &PathSettings,
) -> Result<RegularizationPath> {
    let problem = CenteredProblem::new(x, y)?;
    path_from_problem(&problem, method, settings)
}

pub fn path_from_problem(
    problem: &CenteredProblem,
    method: Method,
    settings: &PathSettings,
) -> Result<RegularizationPath> {
    let lmax = problem.lambda_max();
    let hi = match method {
        Method::Lasso => lmax,
        Method::Ridge => settings.ridge_lambda_hi.unwrap_or(lmax),
        Method::Ols => {
            return Err(Error::InvalidArgument(
                "regularization paths exist only for ridge and lasso".into(),
            ))
        }
    };
    let lambdas = lambda_grid(hi, settings.grid_size, settings.lambda_min_ratio)?;
    let wrap = |lambda: f64| {
        move |e: Error| Error::PathFit {
            lambda,
            source: Box::new(e),
        }
    };

    let (models, diagnostics) = match method {
        Method::Ridge => {
            let models = lambdas
                .par_iter()
                .map(|&l| solve_ridge(problem, l, &OlsOptions::default()).map_err(wrap(l)))
                .collect::<Result<Vec<_>>>()?;
            (models, Vec::new())
        }
        Method::Lasso => {
            let mut models = Vec::with_capacity(lambdas.len());
            let mut diags = Vec::with_capacity(lambdas.len());
            let mut warm: Option<Vec<f64>> = None;
            for &l in &lambdas {
                let (m, d) =
                    solve_lasso(problem, l, &settings.lasso, warm.as_deref()).map_err(wrap(l))?;
                warm = Some(m.coefficients.clone());
                models.push(m);
                diags.push(d);
            }
            (models, diags)
        }
        Method::Ols => unreachable!(),
    };
    Ok(RegularizationPath {
        method,
        intercepts: models.iter().map(|m| m.intercept).collect(),
        coefficients: models.into_iter().map(|m| m.coefficients).collect(),
        lambdas,
        diagnostics,
    })
}
