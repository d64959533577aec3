//! Average-linkage agglomerative clustering and dendrogram cuts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

/// One agglomeration step. Leaves are nodes `0..n`; the merge at step `s`
/// creates node `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub similarity: f64,
    /// Number of leaves under the new node.
    pub size: usize,
}

/// Full merge tree; merges are in non-increasing similarity order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

/// A partition of object indices into clusters. Members are sorted and
/// clusters are ordered by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub clusters: Vec<Vec<usize>>,
}

impl Partition {
    pub fn singletons(n: usize) -> Self {
        Partition {
            clusters: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Canonical partition from a label per object.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut by_label: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, &l) in labels.iter().enumerate() {
            by_label.entry(l).or_default().push(i);
        }
        let mut clusters: Vec<Vec<usize>> = by_label.into_values().collect();
        clusters.sort_by_key(|c| c[0]);
        Partition { clusters }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Cluster index of every object.
    pub fn labels(&self, n: usize) -> Vec<usize> {
        let mut labels = vec![usize::MAX; n];
        for (c, members) in self.clusters.iter().enumerate() {
            for &m in members {
                labels[m] = c;
            }
        }
        labels
    }

    /// True when every cluster of `self` lies inside one cluster of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let n = self.clusters.iter().map(Vec::len).sum();
        let outer = coarser.labels(n);
        self.clusters
            .iter()
            .all(|c| c.iter().all(|&m| outer[m] == outer[c[0]]))
    }
}

#[derive(Clone, Copy)]
struct RowBest {
    sim: f64,
    col: usize,
}

const NO_BEST: RowBest = RowBest {
    sim: f64::NEG_INFINITY,
    col: usize::MAX,
};

/// Average-linkage agglomeration over a symmetric similarity matrix.
///
/// Each step merges the most similar pair of active clusters, breaking ties
/// by the lexicographically smallest `(i, j)` slot pair, where a merged
/// cluster takes the smaller slot. Inter-cluster similarity is the mean
/// pairwise similarity, maintained with the Lance–Williams update
/// `s(i+j, k) = (n_i s(i, k) + n_j s(j, k)) / (n_i + n_j)`.
/// Each row caches its best partner to its right so that a step only rescans
/// rows whose cached partner was touched.
pub fn hierarchical_cluster(matrix: &SimilarityMatrix) -> Result<Dendrogram> {
    let n = matrix.len();
    if n == 0 {
        return Err(Error::Empty("similarity matrix"));
    }
    matrix.validate()?;
    let mut sim: Vec<f64> = (0..n).flat_map(|i| matrix.row(i).to_vec()).collect();
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut node = (0..n).collect::<Vec<_>>();
    let mut best = vec![NO_BEST; n];

    let rescan = |sim: &[f64], active: &[bool], i: usize| -> RowBest {
        let mut b = NO_BEST;
        for k in i + 1..n {
            if active[k] && sim[i * n + k] > b.sim {
                b = RowBest {
                    sim: sim[i * n + k],
                    col: k,
                };
            }
        }
        b
    };
    for i in 0..n {
        best[i] = rescan(&sim, &active, i);
    }

    let mut merges = Vec::with_capacity(n - 1);
    let mut ceiling = f64::INFINITY;
    for step in 0..n - 1 {
        let mut i = usize::MAX;
        let mut top = f64::NEG_INFINITY;
        for r in 0..n {
            if active[r] && best[r].col != usize::MAX && best[r].sim > top {
                top = best[r].sim;
                i = r;
            }
        }
        let j = best[i].col;
        // average linkage is reducible; clamp away rounding above the last level
        let level = top.min(ceiling);
        ceiling = level;
        merges.push(Merge {
            left: node[i],
            right: node[j],
            similarity: level,
            size: size[i] + size[j],
        });

        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let v = (ni * sim[i * n + k] + nj * sim[j * n + k]) / (ni + nj);
            sim[i * n + k] = v;
            sim[k * n + i] = v;
        }
        active[j] = false;
        size[i] += size[j];
        node[i] = n + step;
        best[j] = NO_BEST;
        best[i] = rescan(&sim, &active, i);

        for k in 0..i {
            if !active[k] {
                continue;
            }
            if best[k].col == i || best[k].col == j {
                best[k] = rescan(&sim, &active, k);
            } else {
                let v = sim[k * n + i];
                if v > best[k].sim || (v == best[k].sim && i < best[k].col) {
                    best[k] = RowBest { sim: v, col: i };
                }
            }
        }
        for k in i + 1..j {
            if active[k] && best[k].col == j {
                best[k] = rescan(&sim, &active, k);
            }
        }
    }
    Ok(Dendrogram { leaves: n, merges })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

impl Dendrogram {
    /// Some leaf under each node, indexed by node id.
    fn representatives(&self) -> Vec<usize> {
        let mut rep: Vec<usize> = (0..self.leaves).collect();
        for m in &self.merges {
            rep.push(rep[m.left]);
        }
        rep
    }

    fn partition_after(&self, applied: impl Iterator<Item = usize>) -> Partition {
        let rep = self.representatives();
        let mut uf = UnionFind::new(self.leaves);
        for s in applied {
            let m = &self.merges[s];
            uf.union(rep[m.left], rep[m.right]);
        }
        let labels: Vec<usize> = (0..self.leaves).map(|i| uf.find(i)).collect();
        Partition::from_labels(&labels)
    }

    /// Distinct merge similarities, highest first.
    pub fn levels(&self) -> Vec<f64> {
        let mut levels: Vec<f64> = Vec::new();
        for m in &self.merges {
            if levels.last() != Some(&m.similarity) {
                levels.push(m.similarity);
            }
        }
        levels
    }

    pub fn max_similarity(&self) -> Option<f64> {
        self.merges.first().map(|m| m.similarity)
    }
}

/// Applies exactly the merges with similarity `>= tau`.
pub fn cut(d: &Dendrogram, tau: f64) -> Partition {
    d.partition_after((0..d.merges.len()).filter(|&s| d.merges[s].similarity >= tau))
}

/// Applies the first `leaves - k` merges, leaving exactly `k` clusters
/// (clamped to `1..=leaves`) regardless of ties between merge levels.
pub fn cut_to_count(d: &Dendrogram, k: usize) -> Partition {
    let k = k.clamp(1.min(d.leaves), d.leaves);
    d.partition_after(0..d.leaves - k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    /// Cut threshold; `None` stands for a threshold above every merge.
    pub tau: Option<f64>,
    pub cluster_count: usize,
    pub partition: Partition,
}

/// The all-singletons cut followed by one cut per distinct merge similarity,
/// from the highest level down.
pub fn cut_sweep(d: &Dendrogram) -> Vec<SweepEntry> {
    let mut out = vec![SweepEntry {
        tau: None,
        cluster_count: d.leaves,
        partition: Partition::singletons(d.leaves),
    }];
    let rep = d.representatives();
    let mut uf = UnionFind::new(d.leaves);
    let mut s = 0;
    for level in d.levels() {
        while s < d.merges.len() && d.merges[s].similarity >= level {
            uf.union(rep[d.merges[s].left], rep[d.merges[s].right]);
            s += 1;
        }
        let labels: Vec<usize> = (0..d.leaves).map(|i| uf.find(i)).collect();
        let partition = Partition::from_labels(&labels);
        out.push(SweepEntry {
            tau: Some(level),
            cluster_count: partition.len(),
            partition,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_point() -> SimilarityMatrix {
        SimilarityMatrix::from_rows(vec![
            vec![1.0, 0.9, 0.1, 0.1],
            vec![0.9, 1.0, 0.1, 0.1],
            vec![0.1, 0.1, 1.0, 0.9],
            vec![0.1, 0.1, 0.9, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn empty_matrix_errors() {
        let m = SimilarityMatrix::from_rows(vec![]).unwrap();
        assert!(hierarchical_cluster(&m).is_err());
    }

    #[test]
    fn single_leaf_has_no_merges() {
        let m = SimilarityMatrix::from_rows(vec![vec![1.0]]).unwrap();
        let d = hierarchical_cluster(&m).unwrap();
        assert!(d.merges.is_empty());
        assert_eq!(cut_sweep(&d).len(), 1);
    }

    #[test]
    fn two_leaves_merge_at_off_diagonal() {
        let m = SimilarityMatrix::from_rows(vec![vec![1.0, 0.37], vec![0.37, 1.0]]).unwrap();
        let d = hierarchical_cluster(&m).unwrap();
        assert_eq!(d.merges, vec![Merge { left: 0, right: 1, similarity: 0.37, size: 2 }]);
        let sweep = cut_sweep(&d);
        let counts: Vec<_> = sweep.iter().map(|e| e.cluster_count).collect();
        assert_eq!(counts, vec![2, 1]);
    }

    #[test]
    fn four_point_trace() {
        let d = hierarchical_cluster(&four_point()).unwrap();
        let sims: Vec<f64> = d.merges.iter().map(|m| m.similarity).collect();
        assert_eq!(sims, vec![0.9, 0.9, 0.1]);
        assert_eq!((d.merges[0].left, d.merges[0].right), (0, 1));
        assert_eq!((d.merges[1].left, d.merges[1].right), (2, 3));
        assert_eq!((d.merges[2].left, d.merges[2].right), (4, 5));
        assert_eq!(cut(&d, 0.5).clusters, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(cut(&d, 0.95).len(), 4);
        assert_eq!(cut(&d, 0.0).len(), 1);
        let counts: Vec<_> = cut_sweep(&d).iter().map(|e| e.cluster_count).collect();
        assert_eq!(counts, vec![4, 2, 1]);
    }

    #[test]
    fn cut_to_count_ignores_tied_levels() {
        let m = SimilarityMatrix::from_rows(vec![vec![1.0; 5]; 5]).unwrap();
        let d = hierarchical_cluster(&m).unwrap();
        for k in 1..=5 {
            assert_eq!(cut_to_count(&d, k).len(), k);
        }
        assert_eq!(cut_to_count(&d, 0).len(), 1);
        assert_eq!(cut_to_count(&d, 9).len(), 5);
    }

    #[test]
    fn all_ones_block() {
        let m = SimilarityMatrix::from_rows(vec![vec![1.0; 5]; 5]).unwrap();
        let d = hierarchical_cluster(&m).unwrap();
        assert!(d.merges.iter().all(|m| m.similarity == 1.0));
        let counts: Vec<_> = cut_sweep(&d).iter().map(|e| e.cluster_count).collect();
        assert_eq!(counts, vec![5, 1]);
    }

    #[test]
    fn ties_pick_smallest_pair() {
        // every off-diagonal equal: merges (0,1), then (0,2) in slot terms
        let m = SimilarityMatrix::from_rows(vec![
            vec![1.0, 0.5, 0.5],
            vec![0.5, 1.0, 0.5],
            vec![0.5, 0.5, 1.0],
        ])
        .unwrap();
        let d = hierarchical_cluster(&m).unwrap();
        assert_eq!((d.merges[0].left, d.merges[0].right), (0, 1));
        assert_eq!((d.merges[1].left, d.merges[1].right), (3, 2));
    }

    #[test]
    fn refinement_relation() {
        let fine = Partition { clusters: vec![vec![0], vec![1], vec![2, 3]] };
        let coarse = Partition { clusters: vec![vec![0, 1], vec![2, 3]] };
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
    }
}
