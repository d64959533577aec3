//! Confusion matrix between reference topics and predicted clusters, and the
//! partition NMI computed from it.

use serde::{Deserialize, Serialize};

use super::truth::GroundTruth;
use crate::clustering::ClusterCover;
use crate::error::{Error, Result};

/// `counts[i * cols + j]` = messages in topic `i` and cluster `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub rows: usize,
    pub cols: usize,
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            counts: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("confusion matrix rows differ in length"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            counts: rows.concat(),
        })
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn add(&mut self, i: usize, j: usize, n: u64) {
        self.counts[i * self.cols + j] += n;
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.rows)
            .map(|i| self.counts[i * self.cols..(i + 1) * self.cols].iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut sums = vec![0; self.cols];
        for (idx, &c) in self.counts.iter().enumerate() {
            sums[idx % self.cols] += c;
        }
        sums
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Counts every (topic, cluster) co-membership of each labeled message.
/// Messages outside the ground truth are ignored.
pub fn confusion(truth: &GroundTruth, cover: &ClusterCover) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::new(truth.len(), cover.len());
    for (j, cluster) in cover.clusters.iter().enumerate() {
        for id in cluster {
            if let Some(topics) = truth.labels.get(id) {
                for &i in topics {
                    m.add(i, j, 1);
                }
            }
        }
    }
    m
}

/// Normalized mutual information from a confusion matrix:
///
/// `-2 Σ N_ij ln(N_ij N / (N_i. N_.j)) / (Σ N_i. ln(N_i./N) + Σ N_.j ln(N_.j/N))`
///
/// Two single-block partitions have zero entropy on both sides; they agree
/// perfectly and score 1.
pub fn nmi(m: &ConfusionMatrix) -> Result<f64> {
    let total = m.total();
    if total == 0 {
        return Err(Error::Empty("confusion matrix"));
    }
    let n = total as f64;
    let rows = m.row_sums();
    let cols = m.col_sums();
    let mut num = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            let c = m.get(i, j);
            if c > 0 {
                let c = c as f64;
                num += c * (c * n / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    let entropy_term = |sums: &[u64]| -> f64 {
        sums.iter()
            .filter(|&&s| s > 0)
            .map(|&s| s as f64 * (s as f64 / n).ln())
            .sum()
    };
    let den = entropy_term(&rows) + entropy_term(&cols);
    if den == 0.0 {
        return Ok(1.0);
    }
    Ok((-2.0 * num / den).clamp(0.0, 1.0))
}
