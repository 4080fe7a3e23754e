//! Exact k-nearest-neighbour classification of the load type.
//!
//! Neighbours are ranked by squared Euclidean distance, ties going to the
//! lower training row. The vote is a plain majority; when several classes
//! share the top count the class of the nearest neighbour among them wins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Euclidean,
}

/// Lazy learner: the training rows and their labels, verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    data: Matrix,
    labels: Vec<u32>,
    distance: Distance,
}

pub fn fit_knn(x: &Matrix, labels: &[u32]) -> Result<KnnModel> {
    if x.nrows() == 0 {
        return Err(Error::Empty("knn needs at least one training row"));
    }
    if labels.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            actual: labels.len(),
        });
    }
    Ok(KnnModel {
        data: x.clone(),
        labels: labels.to_vec(),
        distance: Distance::Euclidean,
    })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KnnModel {
    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn nfeatures(&self) -> usize {
        self.data.ncols()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn distance(&self) -> Distance {
        self.distance
    }

    fn check_query(&self, x: &[f64], k: usize) -> Result<()> {
        if x.len() != self.nfeatures() {
            return Err(Error::DimensionMismatch {
                expected: self.nfeatures(),
                actual: x.len(),
            });
        }
        if k == 0 || k > self.nrows() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} must lie in 1..={}",
                self.nrows()
            )));
        }
        Ok(())
    }

    /// Training-row indices of the `k` nearest neighbours, nearest first.
    pub fn neighbors(&self, x: &[f64], k: usize) -> Result<Vec<usize>> {
        self.check_query(x, k)?;
        Ok(self.nearest(x, k))
    }

    // Keeps a sorted buffer of the best `k` (distance, row) pairs; rows are
    // visited in ascending order so an equal distance never displaces an
    // earlier row.
    fn nearest(&self, x: &[f64], k: usize) -> Vec<usize> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, row) in self.data.rows().enumerate() {
            let d = squared_distance(row, x);
            if best.len() == k && d >= best[k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(k);
        }
        best.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict(&self, x: &[f64], k: usize) -> Result<u32> {
        let order = self.neighbors(x, k)?;
        Ok(Vote::new(self.classes()).extend(order.iter().map(|&i| self.labels[i])))
    }

    /// Predictions for every row of `x`.
    pub fn predict_batch(&self, x: &Matrix, k: usize) -> Result<Vec<u32>> {
        if x.nrows() > 0 {
            self.check_query(x.row(0), k)?;
        }
        let classes = self.classes();
        Ok((0..x.nrows())
            .into_par_iter()
            .map(|i| {
                let order = self.nearest(x.row(i), k);
                Vote::new(classes).extend(order.iter().map(|&j| self.labels[j]))
            })
            .collect())
    }

    fn classes(&self) -> usize {
        self.labels.iter().max().map_or(1, |&m| m as usize + 1)
    }
}

pub fn predict_knn(model: &KnnModel, x: &[f64], k: usize) -> Result<u32> {
    model.predict(x, k)
}

/// Running vote over neighbours taken nearest first.
struct Vote {
    counts: Vec<usize>,
    first_seen: Vec<usize>,
    seen: usize,
    leader: Option<u32>,
}

impl Vote {
    fn new(classes: usize) -> Self {
        Self {
            counts: vec![0; classes],
            first_seen: vec![usize::MAX; classes],
            seen: 0,
            leader: None,
        }
    }

    fn push(&mut self, label: u32) -> u32 {
        let c = label as usize;
        if c >= self.counts.len() {
            self.counts.resize(c + 1, 0);
            self.first_seen.resize(c + 1, usize::MAX);
        }
        if self.counts[c] == 0 {
            self.first_seen[c] = self.seen;
        }
        self.counts[c] += 1;
        self.seen += 1;
        let better = match self.leader {
            None => true,
            Some(l) => {
                let l = l as usize;
                self.counts[c] > self.counts[l]
                    || (self.counts[c] == self.counts[l] && self.first_seen[c] < self.first_seen[l])
            }
        };
        if better {
            self.leader = Some(label);
        }
        self.leader.expect("set above")
    }

    fn extend(mut self, labels: impl Iterator<Item = u32>) -> u32 {
        let mut last = 0;
        for l in labels {
            last = self.push(l);
        }
        last
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweepResult {
    /// `1..=k_max`
    pub k_values: Vec<usize>,
    pub error_rates: Vec<f64>,
    /// Smallest k attaining the minimum error rate.
    pub best_k: usize,
}

impl KSweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,error_rate\n");
        for (k, e) in self.k_values.iter().zip(&self.error_rates) {
            out.push_str(&format!("{k},{e}\n"));
        }
        out
    }

    pub fn best_error_rate(&self) -> f64 {
        self.error_rates[self.best_k - 1]
    }
}

/// Misclassification rate on the test rows for every `k` in `1..=k_max`.
///
/// One neighbour search of depth `k_max` per query serves all k: the vote
/// for `k` is the prefix of length `k` of the neighbour list.
pub fn k_sweep(
    model: &KnnModel,
    test_x: &Matrix,
    test_labels: &[u32],
    k_max: usize,
) -> Result<KSweepResult> {
    if test_x.nrows() == 0 {
        return Err(Error::Empty("k sweep needs at least one test row"));
    }
    if test_labels.len() != test_x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: test_x.nrows(),
            actual: test_labels.len(),
        });
    }
    model.check_query(test_x.row(0), k_max)?;
    let classes = model.classes();
    let errors_per_query: Vec<Vec<bool>> = (0..test_x.nrows())
        .into_par_iter()
        .map(|i| {
            let order = model.nearest(test_x.row(i), k_max);
            let mut vote = Vote::new(classes);
            order
                .iter()
                .map(|&j| vote.push(model.labels[j]) != test_labels[i])
                .collect()
        })
        .collect();
    let n = test_x.nrows() as f64;
    let error_rates: Vec<f64> = (0..k_max)
        .map(|k| errors_per_query.iter().filter(|e| e[k]).count() as f64 / n)
        .collect();
    let best_k =
        error_rates.iter().enumerate().fold(
            0,
            |best, (i, &e)| if e < error_rates[best] { i } else { best },
        ) + 1;
    Ok(KSweepResult {
        k_values: (1..=k_max).collect(),
        error_rates,
        best_k,
    })
}
