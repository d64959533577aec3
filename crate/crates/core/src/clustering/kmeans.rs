//! Spherical K-means over length-normalized TF-IDF vectors.
//!
//! Distance is `1 - cosine`. Each run starts from `k` distinct objects picked
//! by a seeded RNG (run `r` uses stream `r` of the seed), then alternates
//! assignment and normalized-mean centroid updates until assignments settle.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hierarchical::Partition;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::protomeme::Protomeme;
use crate::similarity::{intern_features, SparseVector};

pub const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansRun {
    pub seeds: Vec<usize>,
    pub partition: Partition,
    /// Sum of cosine distances to the assigned centroids.
    pub inertia: f64,
    /// Objective after every assignment step.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub k: usize,
    pub runs: Vec<KMeansRun>,
}

impl KMeansResult {
    /// Run with the lowest inertia; earliest on ties.
    pub fn best(&self) -> &KMeansRun {
        self.runs
            .iter()
            .reduce(|a, b| if b.inertia < a.inertia { b } else { a })
            .expect("at least one run")
    }
}

/// Spherical K-means over the protomemes' content vectors.
pub fn kmeans(protomemes: &[Protomeme], k: usize, runs: usize, seed: u64) -> Result<KMeansResult> {
    let vectors: Vec<SparseVector> = intern_features(protomemes)
        .into_iter()
        .map(|f| f.terms)
        .collect();
    spherical_kmeans(&vectors, k, runs, seed, Execution::default())
}

fn unit(v: &SparseVector) -> Vec<(u32, f64)> {
    if v.is_zero() {
        return Vec::new();
    }
    let norm = v.norm_sq.sqrt();
    v.entries.iter().map(|&(i, x)| (i, x / norm)).collect()
}

fn dot(x: &[(u32, f64)], centroid: &[f64]) -> f64 {
    x.iter().map(|&(i, v)| v * centroid[i as usize]).sum()
}

fn normalize_dense(c: &mut [f64]) -> bool {
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 0.0 {
        return false;
    }
    c.iter_mut().for_each(|v| *v /= norm);
    true
}

pub fn spherical_kmeans(
    vectors: &[SparseVector],
    k: usize,
    runs: usize,
    seed: u64,
    exec: Execution,
) -> Result<KMeansResult> {
    let n = vectors.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must be in 1..={n}, got {k}")));
    }
    if runs == 0 {
        return Err(Error::invalid("at least one K-means run is required"));
    }
    let points: Vec<Vec<(u32, f64)>> = vectors.iter().map(unit).collect();
    let dim = points
        .iter()
        .flat_map(|p| p.iter().map(|&(i, _)| i as usize + 1))
        .max()
        .unwrap_or(0);
    let run_ids: Vec<u64> = (0..runs as u64).collect();
    let results = exec.map_slice(&run_ids, |&r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r);
        let mut seeds = sample(&mut rng, n, k).into_vec();
        seeds.sort_unstable();
        single_run(&points, dim, seeds)
    });
    Ok(KMeansResult { k, runs: results })
}

fn single_run(points: &[Vec<(u32, f64)>], dim: usize, seeds: Vec<usize>) -> KMeansRun {
    let n = points.len();
    let k = seeds.len();
    if k == n {
        // every object is its own seed
        let inertia = points.iter().filter(|p| p.is_empty()).count() as f64;
        return KMeansRun {
            seeds,
            partition: Partition::singletons(n),
            inertia,
            objective_trace: vec![inertia],
        };
    }
    let mut centroids: Vec<Vec<f64>> = seeds
        .iter()
        .map(|&s| {
            let mut c = vec![0.0; dim];
            for &(i, v) in &points[s] {
                c[i as usize] = v;
            }
            c
        })
        .collect();
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        let mut objective = 0.0;
        for (p, point) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_cos = f64::NEG_INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let cos = dot(point, centroid);
                if cos > best_cos {
                    best_cos = cos;
                    best = c;
                }
            }
            objective += 1.0 - best_cos;
            if labels[p] != best {
                labels[p] = best;
                changed = true;
            }
        }
        trace.push(objective);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        for (p, point) in points.iter().enumerate() {
            for &(i, v) in point {
                sums[labels[p]][i as usize] += v;
            }
        }
        for (c, mut sum) in sums.into_iter().enumerate() {
            // an empty or all-zero cluster keeps its previous centroid
            if normalize_dense(&mut sum) {
                centroids[c] = sum;
            }
        }
    }
    KMeansRun {
        seeds,
        partition: Partition::from_labels(&labels),
        inertia: *trace.last().expect("at least one iteration"),
        objective_trace: trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(entries: &[(u32, f64)]) -> SparseVector {
        SparseVector::new(entries.to_vec())
    }

    fn two_groups() -> Vec<SparseVector> {
        let mut v = Vec::new();
        for i in 0..6 {
            let jitter = 0.05 * i as f64;
            v.push(sv(&[(0, 1.0), (1, 0.5 + jitter), (2, 0.1)]));
        }
        for i in 0..6 {
            let jitter = 0.05 * i as f64;
            v.push(sv(&[(3, 1.0), (4, 0.4 + jitter), (5, 0.2)]));
        }
        v
    }

    #[test]
    fn k_bounds() {
        let v = two_groups();
        assert!(spherical_kmeans(&v, 0, 1, 0, Execution::Sequential).is_err());
        assert!(spherical_kmeans(&v, 13, 1, 0, Execution::Sequential).is_err());
        assert!(spherical_kmeans(&v, 2, 0, 0, Execution::Sequential).is_err());
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let v = two_groups();
        let r = spherical_kmeans(&v, v.len(), 2, 1, Execution::Sequential).unwrap();
        assert!(r.runs.iter().all(|run| run.partition.len() == v.len()));
    }

    #[test]
    fn k_one_gives_one_cluster() {
        let v = two_groups();
        let r = spherical_kmeans(&v, 1, 3, 1, Execution::Sequential).unwrap();
        assert!(r.runs.iter().all(|run| run.partition.len() == 1));
    }

    #[test]
    fn recovers_planted_groups_in_every_run() {
        let v = two_groups();
        let planted = Partition { clusters: vec![(0..6).collect(), (6..12).collect()] };
        let r = spherical_kmeans(&v, 2, 5, 42, Execution::Sequential).unwrap();
        for run in &r.runs {
            assert_eq!(run.partition, planted);
        }
    }

    #[test]
    fn runs_are_seeded_and_strategy_independent() {
        let v = two_groups();
        let a = spherical_kmeans(&v, 3, 4, 9, Execution::Sequential).unwrap();
        let b = spherical_kmeans(&v, 3, 4, 9, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn objective_never_increases() {
        let v: Vec<SparseVector> = (0..40u32)
            .map(|i| sv(&[(i % 7, 1.0 + (i % 3) as f64), ((i * 5) % 11 + 7, 0.5), (i % 4 + 20, 0.3)]))
            .collect();
        let r = spherical_kmeans(&v, 5, 6, 3, Execution::Sequential).unwrap();
        for run in &r.runs {
            for w in run.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{:?}", run.objective_trace);
            }
        }
    }
}
