#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steelpower::linalg::Matrix;

pub fn matrix(n: usize, p: usize, values: &[f64]) -> Matrix {
    Matrix::from_row_major(n, p, values.to_vec()).unwrap()
}

/// Gaussian-ish design with a known linear signal plus noise.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (Matrix, Vec<f64>) {
    let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mut data = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p)
            .map(|_| rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0))
            .collect();
        let signal: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        y.push(1.5 + signal + rng.random_range(-0.5..0.5));
        data.extend(row);
    }
    (matrix(n, p, &data), y)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rss(x: &Matrix, y: &[f64], intercept: f64, beta: &[f64]) -> f64 {
    x.rows()
        .zip(y)
        .map(|(row, yi)| {
            let fit: f64 = intercept + row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>();
            (yi - fit) * (yi - fit)
        })
        .sum()
}

pub fn centered(x: &Matrix, y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = x.nrows() as f64;
    let means: Vec<f64> = (0..x.ncols())
        .map(|j| x.column(j).iter().sum::<f64>() / n)
        .collect();
    let ym = y.iter().sum::<f64>() / n;
    let xc = x
        .rows()
        .map(|r| r.iter().zip(&means).map(|(a, m)| a - m).collect())
        .collect();
    (xc, y.iter().map(|v| v - ym).collect())
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Reference k-NN: full sort by (distance, row), majority vote, ties to
/// the class whose first occurrence in the sorted list is earliest.
pub fn brute_knn(train: &[Vec<f64>], labels: &[u32], q: &[f64], k: usize) -> u32 {
    let mut order: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum(), i))
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let top: Vec<u32> = order[..k].iter().map(|&(_, i)| labels[i]).collect();
    let mut best: Option<(usize, usize, u32)> = None; // (count, first position, label)
    for (pos, &l) in top.iter().enumerate() {
        if top[..pos].contains(&l) {
            continue;
        }
        let count = top.iter().filter(|&&m| m == l).count();
        let better = match best {
            None => true,
            Some((c, p, _)) => count > c || (count == c && pos < p),
        };
        if better {
            best = Some((count, pos, l));
        }
    }
    best.unwrap().2
}
