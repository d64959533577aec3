//! Overlapping-cover NMI (Lancichinetti–Fortunato–Kertész).
//!
//! Each cluster is treated as a binary random variable over the universe of
//! messages. For a reference topic `X_k` and a predicted cluster `Y_l` the
//! joint distribution has four cells; the conditional entropy
//! `H(X_k | Y_l)` only counts when `Y_l` is actually informative about
//! `X_k`, i.e. when
//!
//! ```text
//! h(p11) + h(p00) > h(p01) + h(p10)
//! ```
//!
//! `H(X_k | Y)` is the smallest accepted conditional entropy (or `H(X_k)` when
//! none is accepted), normalized by `H(X_k)`. The final score is
//! `1 - (H(X|Y)_norm + H(Y|X)_norm) / 2`, where each side averages over its
//! clusters.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::truth::GroundTruth;
use crate::clustering::ClusterCover;
use crate::error::{Error, Result};

/// Name of the variant recorded in reports.
pub const LFK_VARIANT: &str = "lfk2009";

/// `h(c) = -(c/n) ln(c/n)` for every `c in 0..=n`.
#[derive(Debug, Clone)]
pub(crate) struct EntropyTable {
    h: Vec<f64>,
}

impl EntropyTable {
    pub(crate) fn new(n: usize) -> Self {
        let nf = n as f64;
        let h = (0..=n)
            .map(|c| {
                if c == 0 || c == n {
                    0.0
                } else {
                    let p = c as f64 / nf;
                    -p * p.ln()
                }
            })
            .collect();
        Self { h }
    }

    fn n(&self) -> usize {
        self.h.len() - 1
    }

    /// Entropy of a cluster of `size` members as a binary variable.
    pub(crate) fn entropy(&self, size: usize) -> f64 {
        self.h[size] + self.h[self.n() - size]
    }

    /// `H(A | B)` for clusters of sizes `a`, `b` sharing `i` members, or
    /// `None` when the pair fails the informativeness test.
    pub(crate) fn conditional(&self, a: usize, b: usize, i: usize) -> Option<f64> {
        let n = self.n();
        let h11 = self.h[i];
        let h10 = self.h[a - i];
        let h01 = self.h[b - i];
        let h00 = self.h[n + i - a - b];
        if h11 + h00 > h01 + h10 {
            let joint = h11 + h10 + h01 + h00;
            Some((joint - self.entropy(b)).max(0.0))
        } else {
            None
        }
    }

    /// Normalized `H(A | ·)` given the best accepted conditional entropy.
    pub(crate) fn ratio(&self, a: usize, best: Option<f64>) -> f64 {
        let ha = self.entropy(a);
        if ha <= 0.0 {
            return 0.0;
        }
        let cond = best.map_or(ha, |c| c.min(ha));
        (cond / ha).clamp(0.0, 1.0)
    }
}

/// Smallest accepted `H(A | B_l)` over the given `(size_b, intersection)` pairs.
fn best_conditional(
    table: &EntropyTable,
    a: usize,
    pairs: impl Iterator<Item = (usize, usize)>,
) -> Option<f64> {
    pairs
        .filter_map(|(b, i)| table.conditional(a, b, i))
        .fold(None, |best: Option<f64>, c| Some(best.map_or(c, |b| b.min(c))))
}

/// LFK-NMI from cluster sizes and a dense `x.len() × y.len()` intersection
/// table (row-major by `x`). All clusters must be non-empty subsets of a
/// universe of `n` elements.
pub fn lfk_from_counts(n: usize, x: &[usize], y: &[usize], inter: &[usize]) -> Result<f64> {
    if n == 0 {
        return Err(Error::Empty("universe"));
    }
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("cover"));
    }
    if inter.len() != x.len() * y.len() {
        return Err(Error::invalid("intersection table has the wrong shape"));
    }
    let table = EntropyTable::new(n);
    let l = y.len();
    let x_side: f64 = x
        .iter()
        .enumerate()
        .map(|(k, &xs)| {
            let best = best_conditional(&table, xs, (0..l).map(|j| (y[j], inter[k * l + j])));
            table.ratio(xs, best)
        })
        .sum::<f64>()
        / x.len() as f64;
    let y_side: f64 = y
        .iter()
        .enumerate()
        .map(|(j, &ys)| {
            let best = best_conditional(&table, ys, x.iter().enumerate().map(|(k, &xs)| (xs, inter[k * l + j])));
            table.ratio(ys, best)
        })
        .sum::<f64>()
        / y.len() as f64;
    Ok((1.0 - 0.5 * (x_side + y_side)).clamp(0.0, 1.0))
}

/// LFK-NMI of two covers over the universe `0..n`, given as member lists.
/// Duplicate members are ignored; empty clusters are dropped.
pub fn lfk_nmi_members(n: usize, x: &[Vec<u32>], y: &[Vec<u32>]) -> Result<f64> {
    let dedup = |cover: &[Vec<u32>]| -> Result<Vec<Vec<u32>>> {
        let mut out = Vec::with_capacity(cover.len());
        for c in cover {
            let mut c = c.clone();
            c.sort_unstable();
            c.dedup();
            if c.last().is_some_and(|&m| m as usize >= n) {
                return Err(Error::invalid("cluster member outside the universe"));
            }
            if !c.is_empty() {
                out.push(c);
            }
        }
        Ok(out)
    };
    let x = dedup(x)?;
    let y = dedup(y)?;
    let mut x_of: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (k, c) in x.iter().enumerate() {
        for &m in c {
            x_of[m as usize].push(k as u32);
        }
    }
    let l = y.len();
    let mut inter = vec![0usize; x.len() * l];
    for (j, c) in y.iter().enumerate() {
        for &m in c {
            for &k in &x_of[m as usize] {
                inter[k as usize * l + j] += 1;
            }
        }
    }
    let xs: Vec<usize> = x.iter().map(Vec::len).collect();
    let ys: Vec<usize> = y.iter().map(Vec::len).collect();
    lfk_from_counts(n, &xs, &ys, &inter)
}

/// Ground truth mapped onto dense indices `0..n` (labeled messages, sorted).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthIndex {
    pub ids: Vec<String>,
    pub topic_sizes: Vec<usize>,
    /// Topics of each indexed message.
    pub topics_of: Vec<Vec<u32>>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl TruthIndex {
    pub fn new(truth: &GroundTruth) -> Self {
        let ids: Vec<String> = truth.labels.keys().cloned().collect();
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i as u32)).collect();
        let topics_of = truth
            .labels
            .values()
            .map(|ts| ts.iter().map(|&t| t as u32).collect())
            .collect();
        let topic_sizes = truth.topics.iter().map(|t| t.tweets.len()).collect();
        Self {
            ids,
            topic_sizes,
            topics_of,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn topic_count(&self) -> usize {
        self.topic_sizes.len()
    }

    pub fn get(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    /// Sorted, distinct indices of the labeled messages among `ids`.
    pub fn members<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Vec<u32> {
        let mut out: Vec<u32> = ids.into_iter().filter_map(|id| self.get(id)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Topic member lists in index space.
    pub fn topic_members(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.topic_count()];
        for (i, ts) in self.topics_of.iter().enumerate() {
            for &t in ts {
                out[t as usize].push(i as u32);
            }
        }
        out
    }

    /// LFK-NMI of predicted clusters given as index lists.
    pub fn score(&self, clusters: &[Vec<u32>]) -> Result<f64> {
        if clusters.iter().all(Vec::is_empty) {
            return Err(Error::Empty("predicted clusters over labeled messages"));
        }
        lfk_nmi_members(self.len(), &self.topic_members(), clusters)
    }
}

/// LFK-NMI of a predicted cover against the ground truth. The universe is the
/// set of labeled messages; unlabeled members are ignored and clusters with no
/// labeled member are dropped.
pub fn lfk_nmi(truth: &GroundTruth, cover: &ClusterCover) -> Result<f64> {
    let index = TruthIndex::new(truth);
    let clusters: Vec<Vec<u32>> = cover
        .clusters
        .iter()
        .map(|c| index.members(c.iter().map(String::as_str)))
        .collect();
    index.score(&clusters)
}

/// LFK-NMI between two covers of string ids, over the union of their members.
pub fn lfk_nmi_covers(a: &[BTreeSet<String>], b: &[BTreeSet<String>]) -> Result<f64> {
    let universe: BTreeSet<&str> = a.iter().chain(b).flatten().map(String::as_str).collect();
    let index: HashMap<&str, u32> = universe.iter().enumerate().map(|(i, id)| (*id, i as u32)).collect();
    let map = |cover: &[BTreeSet<String>]| -> Vec<Vec<u32>> {
        cover
            .iter()
            .map(|c| c.iter().map(|id| index[id.as_str()]).collect())
            .collect()
    };
    lfk_nmi_members(universe.len(), &map(a), &map(b))
}
