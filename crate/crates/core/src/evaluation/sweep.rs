//! LFK-NMI at every cut of a dendrogram, computed incrementally.
//!
//! Re-scoring each cut from scratch costs a full pass over all clusters per
//! level. Instead the merges are replayed: each live cluster keeps its
//! labeled members and per-topic intersection counts, every topic keeps a
//! multiset of its accepted conditional entropies against the live clusters,
//! and the cluster-side ratios are kept as a running sum. A merge then only
//! touches the two clusters involved.

use std::collections::{BTreeMap, HashSet};

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use super::lfk::{EntropyTable, TruthIndex};
use crate::clustering::{Dendrogram, Partition};
use crate::error::{Error, Result};

/// Which cuts to score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sweep {
    /// The all-singletons cut, then one cut per distinct merge level.
    Full,
    /// Cuts at the given thresholds (merges with similarity `>= tau`).
    Thresholds(Vec<f64>),
}

impl Sweep {
    /// `0, step, 2·step, …, 1`.
    pub fn grid(step: f64) -> Self {
        let n = (1.0 / step).round() as usize;
        Sweep::Thresholds((0..=n).map(|i| (i as f64 * step).min(1.0)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCut {
    /// `None` for the all-singletons cut of a full sweep.
    pub tau: Option<f64>,
    /// Number of clusters of objects (protomemes or messages) at this cut.
    pub cluster_count: usize,
    pub lfk_nmi: f64,
}

struct Cluster {
    tweets: HashSet<u32>,
    inter: Vec<u32>,
    /// Accepted `H(X_k | this)` per topic, as stored in the topic multisets.
    accepted: Vec<Option<f64>>,
    ratio: f64,
}

struct Scorer<'a> {
    index: &'a TruthIndex,
    table: EntropyTable,
    per_topic: Vec<BTreeMap<OrderedFloat<f64>, u32>>,
    ratio_sum: f64,
    live: usize,
}

impl<'a> Scorer<'a> {
    fn new(index: &'a TruthIndex) -> Self {
        Self {
            index,
            table: EntropyTable::new(index.len()),
            per_topic: vec![BTreeMap::new(); index.topic_count()],
            ratio_sum: 0.0,
            live: 0,
        }
    }

    fn build(&self, members: &[u32]) -> Cluster {
        let mut tweets = HashSet::with_capacity(members.len());
        let mut inter = vec![0u32; self.index.topic_count()];
        for &m in members {
            if tweets.insert(m) {
                for &t in &self.index.topics_of[m as usize] {
                    inter[t as usize] += 1;
                }
            }
        }
        Cluster {
            tweets,
            inter,
            accepted: Vec::new(),
            ratio: 0.0,
        }
    }

    fn add(&mut self, c: &mut Cluster) {
        let size = c.tweets.len();
        if size == 0 {
            return;
        }
        let mut best: Option<f64> = None;
        c.accepted.clear();
        for (k, &i) in c.inter.iter().enumerate() {
            let xs = self.index.topic_sizes[k];
            let i = i as usize;
            let a = self.table.conditional(xs, size, i);
            if let Some(v) = a {
                *self.per_topic[k].entry(OrderedFloat(v)).or_insert(0) += 1;
            }
            c.accepted.push(a);
            if let Some(v) = self.table.conditional(size, xs, i) {
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        c.ratio = self.table.ratio(size, best);
        self.ratio_sum += c.ratio;
        self.live += 1;
    }

    fn remove(&mut self, c: &Cluster) {
        if c.tweets.is_empty() {
            return;
        }
        for (k, a) in c.accepted.iter().enumerate() {
            if let Some(v) = a {
                let key = OrderedFloat(*v);
                let slot = self.per_topic[k].get_mut(&key).expect("accepted value tracked");
                *slot -= 1;
                if *slot == 0 {
                    self.per_topic[k].remove(&key);
                }
            }
        }
        self.ratio_sum -= c.ratio;
        self.live -= 1;
    }

    fn merge(&mut self, a: Cluster, b: Cluster) -> Cluster {
        self.remove(&a);
        self.remove(&b);
        let (mut big, small) = if a.tweets.len() >= b.tweets.len() { (a, b) } else { (b, a) };
        for m in small.tweets {
            if big.tweets.insert(m) {
                for &t in &self.index.topics_of[m as usize] {
                    big.inter[t as usize] += 1;
                }
            }
        }
        self.add(&mut big);
        big
    }

    fn score(&self) -> Result<f64> {
        if self.live == 0 {
            return Err(Error::Empty("predicted clusters over labeled messages"));
        }
        let k = self.per_topic.len();
        let x_side: f64 = self
            .per_topic
            .iter()
            .enumerate()
            .map(|(t, set)| {
                let best = set.keys().next().map(|v| v.0);
                self.table.ratio(self.index.topic_sizes[t], best)
            })
            .sum::<f64>()
            / k as f64;
        let y_side = (self.ratio_sum / self.live as f64).clamp(0.0, 1.0);
        Ok((1.0 - 0.5 * (x_side + y_side)).clamp(0.0, 1.0))
    }
}

/// Scores the requested cuts of `d`. `members[i]` lists the labeled messages
/// (as [`TruthIndex`] indices) covered by leaf object `i`.
///
/// Full sweeps are returned in merge order (singletons first); threshold
/// sweeps in the order the thresholds were given.
pub fn score_sweep(
    d: &Dendrogram,
    members: &[Vec<u32>],
    index: &TruthIndex,
    sweep: &Sweep,
) -> Result<Vec<ScoredCut>> {
    if members.len() != d.leaves {
        return Err(Error::invalid(format!(
            "{} member lists for {} leaves",
            members.len(),
            d.leaves
        )));
    }
    if index.is_empty() || index.topic_count() == 0 {
        return Err(Error::Empty("ground truth"));
    }
    let mut scorer = Scorer::new(index);
    let mut nodes: Vec<Option<Cluster>> = Vec::with_capacity(d.leaves + d.merges.len());
    for m in members {
        let mut c = scorer.build(m);
        scorer.add(&mut c);
        nodes.push(Some(c));
    }
    let mut applied = 0usize;
    let apply = |scorer: &mut Scorer, nodes: &mut Vec<Option<Cluster>>, s: usize| {
        let merge = &d.merges[s];
        let a = nodes[merge.left].take().expect("merge of a live node");
        let b = nodes[merge.right].take().expect("merge of a live node");
        let c = scorer.merge(a, b);
        nodes.push(Some(c));
    };

    let mut out = Vec::new();
    match sweep {
        Sweep::Full => {
            out.push(ScoredCut {
                tau: None,
                cluster_count: d.leaves,
                lfk_nmi: scorer.score()?,
            });
            while applied < d.merges.len() {
                let level = d.merges[applied].similarity;
                while applied < d.merges.len() && d.merges[applied].similarity == level {
                    apply(&mut scorer, &mut nodes, applied);
                    applied += 1;
                }
                out.push(ScoredCut {
                    tau: Some(level),
                    cluster_count: d.leaves - applied,
                    lfk_nmi: scorer.score()?,
                });
            }
        }
        Sweep::Thresholds(taus) => {
            let mut order: Vec<usize> = (0..taus.len()).collect();
            order.sort_by(|&a, &b| taus[b].total_cmp(&taus[a]));
            let mut results = vec![None; taus.len()];
            for i in order {
                let tau = taus[i];
                while applied < d.merges.len() && d.merges[applied].similarity >= tau {
                    apply(&mut scorer, &mut nodes, applied);
                    applied += 1;
                }
                results[i] = Some(ScoredCut {
                    tau: Some(tau),
                    cluster_count: d.leaves - applied,
                    lfk_nmi: scorer.score()?,
                });
            }
            out = results.into_iter().map(|r| r.expect("every threshold scored")).collect();
        }
    }
    Ok(out)
}

/// Direct LFK-NMI of a partition of objects, projected through `members`.
pub fn score_partition(partition: &Partition, members: &[Vec<u32>], index: &TruthIndex) -> Result<f64> {
    let clusters: Vec<Vec<u32>> = partition
        .clusters
        .iter()
        .map(|c| {
            let mut m: Vec<u32> = c.iter().flat_map(|&o| members[o].iter().copied()).collect();
            m.sort_unstable();
            m.dedup();
            m
        })
        .collect();
    index.score(&clusters)
}
