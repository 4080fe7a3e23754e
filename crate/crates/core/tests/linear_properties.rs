mod common;

use common::{centered, matrix, random_problem, rel_close, rss};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use steelpower::linear::{
    self, fit_lasso, fit_ols, fit_ridge, kkt_violation, lambda_max, CenteredProblem, LassoSettings,
    Method, PathSettings,
};

fn tight() -> LassoSettings {
    LassoSettings {
        tol: 1e-12,
        max_iter: 100_000,
        kkt_tol: 1e-9,
    }
}

fn design(n: usize, p: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-2.0f64..2.0, n * p),
        prop::collection::vec(-5.0f64..5.0, n),
    )
}

/// Closed-form ridge on centered data via nalgebra.
fn ridge_oracle(x: &steelpower::Matrix, y: &[f64], lambda: f64) -> Vec<f64> {
    let (xc, yc) = centered(x, y);
    let p = x.ncols();
    let xm = DMatrix::from_fn(xc.len(), p, |i, j| xc[i][j]);
    let yv = DVector::from_column_slice(&yc);
    let a = xm.transpose() * &xm + DMatrix::identity(p, p) * lambda;
    let b = xm.transpose() * yv;
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

/// Plain gradient descent on Σ(yc - Xcβ)² + λ‖β‖².
fn ridge_gradient_descent(x: &steelpower::Matrix, y: &[f64], lambda: f64) -> Vec<f64> {
    let (xc, yc) = centered(x, y);
    let p = x.ncols();
    let fro: f64 = xc.iter().flatten().map(|v| v * v).sum();
    let step = 1.0 / (2.0 * (fro + lambda));
    let mut beta = vec![0.0; p];
    for _ in 0..200_000 {
        let mut grad: Vec<f64> = beta.iter().map(|b| 2.0 * lambda * b).collect();
        for (row, yi) in xc.iter().zip(&yc) {
            let r = yi - row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            for j in 0..p {
                grad[j] -= 2.0 * row[j] * r;
            }
        }
        let norm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        for j in 0..p {
            beta[j] -= step * grad[j];
        }
        if norm < 1e-11 {
            break;
        }
    }
    beta
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ols_is_a_local_minimum((xs, ys) in design(50, 5)) {
        let x = matrix(50, 5, &xs);
        let m = fit_ols(&x, &ys).unwrap();
        let base = rss(&x, &ys, m.intercept, &m.coefficients);
        for j in 0..5 {
            for h in [1e-4, -1e-4] {
                let mut b = m.coefficients.clone();
                b[j] += h;
                prop_assert!(rss(&x, &ys, m.intercept, &b) >= base);
            }
        }
        for h in [1e-4, -1e-4] {
            prop_assert!(rss(&x, &ys, m.intercept + h, &m.coefficients) >= base);
        }
    }

    #[test]
    fn ols_residuals_orthogonal_to_columns((xs, ys) in design(40, 4)) {
        let x = matrix(40, 4, &xs);
        let m = fit_ols(&x, &ys).unwrap();
        let pred = m.predict(&x).unwrap();
        let r: Vec<f64> = ys.iter().zip(&pred).map(|(a, b)| a - b).collect();
        let (xc, _) = centered(&x, &ys);
        let ynorm = ys.iter().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..4 {
            let dot: f64 = xc.iter().zip(&r).map(|(row, ri)| row[j] * ri).sum();
            prop_assert!(dot.abs() < 1e-8 * ynorm.max(1.0));
        }
    }

    #[test]
    fn ridge_matches_closed_form((xs, ys) in design(30, 4), lambda in 0.01f64..50.0) {
        let x = matrix(30, 4, &xs);
        let m = fit_ridge(&x, &ys, lambda).unwrap();
        let oracle = ridge_oracle(&x, &ys, lambda);
        for (a, b) in m.coefficients.iter().zip(&oracle) {
            prop_assert!(rel_close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }

    #[test]
    fn ridge_matches_gradient_descent((xs, ys) in design(20, 3), lambda in 0.5f64..10.0) {
        let x = matrix(20, 3, &xs);
        let m = fit_ridge(&x, &ys, lambda).unwrap();
        let gd = ridge_gradient_descent(&x, &ys, lambda);
        for (a, b) in m.coefficients.iter().zip(&gd) {
            prop_assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn ridge_at_zero_is_ols((xs, ys) in design(30, 4)) {
        let x = matrix(30, 4, &xs);
        let ols = fit_ols(&x, &ys).unwrap();
        let ridge = fit_ridge(&x, &ys, 0.0).unwrap();
        for (a, b) in ols.coefficients.iter().zip(&ridge.coefficients) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
        prop_assert!((ols.intercept - ridge.intercept).abs() <= 1e-8);
    }

    #[test]
    fn lasso_at_zero_is_ols((xs, ys) in design(40, 3)) {
        let x = matrix(40, 3, &xs);
        let ols = fit_ols(&x, &ys).unwrap();
        let (lasso, d) = fit_lasso(&x, &ys, 0.0, &tight()).unwrap();
        prop_assert!(d.converged);
        for (a, b) in ols.coefficients.iter().zip(&lasso.coefficients) {
            prop_assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn huge_ridge_penalty_shrinks_to_mean((xs, ys) in design(30, 3)) {
        let x = matrix(30, 3, &xs);
        let ols = fit_ols(&x, &ys).unwrap();
        let m = fit_ridge(&x, &ys, 1e9).unwrap();
        prop_assert!(m.l2_norm() < 1e-3 * ols.l2_norm().max(1e-300));
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        prop_assert!((m.intercept - mean).abs() < 1e-3 * mean.abs().max(1.0));
    }

    #[test]
    fn lasso_satisfies_kkt_and_descends((xs, ys) in design(60, 5), frac in 0.0f64..1.2) {
        let x = matrix(60, 5, &xs);
        let problem = CenteredProblem::new(&x, &ys).unwrap();
        let lambda = frac * problem.lambda_max();
        let (m, d) = linear::solve_lasso(&problem, lambda, &LassoSettings::default(), None).unwrap();
        prop_assert!(d.converged);
        prop_assert!(d.max_change <= LassoSettings::default().tol);
        prop_assert!(kkt_violation(&problem, &m.coefficients, lambda) <= 1e-6);
        for w in d.objective_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
        }
    }

    #[test]
    fn lasso_above_lambda_max_is_zero((xs, ys) in design(30, 4), extra in 1.0f64..3.0) {
        let x = matrix(30, 4, &xs);
        let lmax = lambda_max(&x, &ys).unwrap();
        let (m, _) = fit_lasso(&x, &ys, lmax * extra, &LassoSettings::default()).unwrap();
        prop_assert!(m.coefficients.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn lambda_max_is_homogeneous((xs, ys) in design(20, 3), c in 0.1f64..10.0) {
        let x = matrix(20, 3, &xs);
        let scaled: Vec<f64> = ys.iter().map(|v| v * c).collect();
        let a = lambda_max(&x, &ys).unwrap();
        let b = lambda_max(&x, &scaled).unwrap();
        prop_assert!(rel_close(b, c * a, 1e-12));
    }

    #[test]
    fn lasso_path_l1_shrinks_as_lambda_grows((xs, ys) in design(80, 4)) {
        let x = matrix(80, 4, &xs);
        let settings = PathSettings { grid_size: 30, lasso: tight(), ..PathSettings::default() };
        let path = linear::regularization_path(&x, &ys, Method::Lasso, &settings).unwrap();
        prop_assert!(path.coefficients[0].iter().all(|&b| b == 0.0));
        let l1: Vec<f64> = path.coefficients.iter().map(|c| c.iter().map(|b| b.abs()).sum()).collect();
        // lambdas decrease along the path, so the L1 norm must not decrease
        for w in l1.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].max(1.0), "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn ridge_path_norm_matches_refits((xs, ys) in design(40, 4)) {
        let x = matrix(40, 4, &xs);
        let settings = PathSettings { grid_size: 20, ..PathSettings::default() };
        let path = linear::regularization_path(&x, &ys, Method::Ridge, &settings).unwrap();
        let norms: Vec<f64> = path.lambdas.iter().map(|&l| {
            ridge_oracle(&x, &ys, l).iter().map(|b| b * b).sum::<f64>().sqrt()
        }).collect();
        for (i, coefs) in path.coefficients.iter().enumerate() {
            let n = coefs.iter().map(|b| b * b).sum::<f64>().sqrt();
            prop_assert!(rel_close(n, norms[i], 1e-9));
        }
        for w in norms.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
        for w in path.lambdas.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
    }
}

#[test]
fn twenty_random_problems_descend_every_sweep() {
    let mut rng = common::rng(11);
    for _ in 0..20 {
        let (x, y) = random_problem(&mut rng, 200, 10);
        let problem = CenteredProblem::new(&x, &y).unwrap();
        for frac in [0.01, 0.1, 0.5] {
            let lambda = frac * problem.lambda_max();
            let (m, d) =
                linear::solve_lasso(&problem, lambda, &LassoSettings::default(), None).unwrap();
            assert!(d.converged);
            assert!(d.max_kkt_violation <= 1e-6);
            assert!(kkt_violation(&problem, &m.coefficients, lambda) <= 1e-6);
            for w in d.objective_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
            }
        }
    }
}

#[test]
fn one_dimensional_closed_forms() {
    let x = matrix(2, 1, &[1.0, -1.0]);
    let y = [1.0, -1.0];
    assert_eq!(lambda_max(&x, &y).unwrap(), 4.0);
    let ridge = fit_ridge(&x, &y, 2.0).unwrap();
    assert!((ridge.coefficients[0] - 0.5).abs() < 1e-12);
    let (lasso, _) = fit_lasso(&x, &y, 2.0, &LassoSettings::default()).unwrap();
    assert!((lasso.coefficients[0] - 0.5).abs() < 1e-12);
    // the LASSO solution switches on exactly at λ = 4
    let (below, _) = fit_lasso(&x, &y, 3.9, &LassoSettings::default()).unwrap();
    let (above, _) = fit_lasso(&x, &y, 4.1, &LassoSettings::default()).unwrap();
    assert!(below.coefficients[0] > 0.0);
    assert_eq!(above.coefficients[0], 0.0);
}

#[test]
fn path_has_requested_length() {
    let mut rng = common::rng(3);
    let (x, y) = random_problem(&mut rng, 50, 3);
    for method in [Method::Ridge, Method::Lasso] {
        let p = linear::regularization_path(&x, &y, method, &PathSettings::default()).unwrap();
        assert_eq!(p.len(), 100);
        assert_eq!(
            p.to_csv(&["a".into(), "b".into(), "c".into()])
                .lines()
                .count(),
            101
        );
    }
    assert!(linear::regularization_path(&x, &y, Method::Ols, &PathSettings::default()).is_err());
}
