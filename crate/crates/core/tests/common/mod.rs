//! Independent reference implementations used as test oracles, plus seeded
//! random generators. Nothing here calls into the library's kernels.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use memeclust::protomeme::{EntityKey, Protomeme};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// cosine similarity over dense vectors

/// Cosine of two dense vectors built over the union of both key sets.
pub fn dense_cosine(a: &HashMap<String, f64>, b: &HashMap<String, f64>) -> f64 {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let va: Vec<f64> = keys.iter().map(|k| a.get(*k).copied().unwrap_or(0.0)).collect();
    let vb: Vec<f64> = keys.iter().map(|k| b.get(*k).copied().unwrap_or(0.0)).collect();
    let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
    let na: f64 = va.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub fn indicator<'a>(items: impl IntoIterator<Item = &'a String>) -> HashMap<String, f64> {
    items.into_iter().map(|k| (k.clone(), 1.0)).collect()
}

/// `[tweet, user, content, diffusion]` by dense brute force.
pub fn oracle_similarities(a: &Protomeme, b: &Protomeme) -> [f64; 4] {
    let users = |p: &Protomeme| p.user_freq.iter().map(|(k, &v)| (k.clone(), v as f64)).collect();
    let terms = |p: &Protomeme| p.term_weights.iter().map(|(k, &v)| (k.clone(), v)).collect();
    [
        dense_cosine(&indicator(&a.tweet_ids), &indicator(&b.tweet_ids)),
        dense_cosine(&users(a), &users(b)),
        dense_cosine(&terms(a), &terms(b)),
        dense_cosine(&indicator(&a.diffusion_set), &indicator(&b.diffusion_set)),
    ]
}

/// Random protomeme over small shared id pools so pairs overlap often.
pub fn random_protomeme(rng: &mut ChaCha8Rng, name: usize) -> Protomeme {
    let mut p = Protomeme::new(EntityKey::hashtag(&format!("h{name}")));
    let n_tweets = rng.gen_range(1..8);
    for _ in 0..n_tweets {
        p.tweet_ids.insert(format!("t{}", rng.gen_range(0..20)));
    }
    for _ in 0..rng.gen_range(1..6) {
        *p.user_freq.entry(format!("u{}", rng.gen_range(0..10))).or_insert(0) += rng.gen_range(1..4);
    }
    for _ in 0..rng.gen_range(0..8) {
        p.term_weights.insert(format!("w{}", rng.gen_range(0..25)), rng.gen_range(0.0..5.0));
    }
    p.diffusion_set.extend(p.user_freq.keys().cloned());
    for _ in 0..rng.gen_range(0..4) {
        p.diffusion_set.insert(format!("u{}", rng.gen_range(0..15)));
    }
    p
}

// ---------------------------------------------------------------------------
// average-linkage agglomeration by full re-scan

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveMerge {
    pub left: usize,
    pub right: usize,
    pub similarity: f64,
}

/// Average linkage recomputed from the original matrix at every step:
/// O(n^2) pair scan, each pair averaging all member similarities. Clusters
/// live in slots; the merged cluster takes the lower slot, node ids follow
/// the `n + step` convention, and ties go to the smallest slot pair.
pub fn naive_average_linkage(sim: &[Vec<f64>]) -> Vec<NaiveMerge> {
    let n = sim.len();
    let mut slots: Vec<Option<(usize, Vec<usize>)>> = (0..n).map(|i| Some((i, vec![i]))).collect();
    let mut merges = Vec::new();
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            let Some((_, mi)) = &slots[i] else { continue };
            for j in i + 1..n {
                let Some((_, mj)) = &slots[j] else { continue };
                let mut total = 0.0;
                for &a in mi {
                    for &b in mj {
                        total += sim[a][b];
                    }
                }
                let avg = total / (mi.len() * mj.len()) as f64;
                if best.is_none_or(|(s, _, _)| avg > s) {
                    best = Some((avg, i, j));
                }
            }
        }
        let (s, i, j) = best.expect("at least two clusters remain");
        let (ni, mut mi) = slots[i].take().unwrap();
        let (nj, mj) = slots[j].take().unwrap();
        mi.extend(mj);
        slots[i] = Some((n + step, mi));
        merges.push(NaiveMerge {
            left: ni,
            right: nj,
            similarity: s,
        });
    }
    merges
}

pub fn random_similarity_matrix(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = rng.gen_range(0.0..1.0);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

// ---------------------------------------------------------------------------
// overlapping NMI from node indicator vectors

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.ln()
    }
}

/// Normalized conditional entropy `H(X|Y)_norm` where every cluster is a
/// binary indicator over the `n` nodes, with joint cells counted node by node.
fn normalized_conditional(x: &[BTreeSet<usize>], y: &[BTreeSet<usize>], n: usize) -> f64 {
    let nf = n as f64;
    let mut total = 0.0;
    for xk in x {
        let px1 = xk.len() as f64 / nf;
        let hx = plogp(px1) + plogp(1.0 - px1);
        let mut best: Option<f64> = None;
        for yl in y {
            let (mut c11, mut c10, mut c01, mut c00) = (0usize, 0usize, 0usize, 0usize);
            for node in 0..n {
                match (xk.contains(&node), yl.contains(&node)) {
                    (true, true) => c11 += 1,
                    (true, false) => c10 += 1,
                    (false, true) => c01 += 1,
                    (false, false) => c00 += 1,
                }
            }
            let p = |c: usize| c as f64 / nf;
            let (h11, h10, h01, h00) = (plogp(p(c11)), plogp(p(c10)), plogp(p(c01)), plogp(p(c00)));
            if h11 + h00 > h01 + h10 {
                let py1 = (c11 + c01) as f64 / nf;
                let hy = plogp(py1) + plogp(1.0 - py1);
                let cond = (h11 + h10 + h01 + h00 - hy).max(0.0);
                best = Some(best.map_or(cond, |b: f64| b.min(cond)));
            }
        }
        let cond = best.map_or(hx, |b| b.min(hx));
        total += if hx > 0.0 { cond / hx } else { 0.0 };
    }
    total / x.len() as f64
}

/// Overlapping NMI of two covers of `0..n`; empty clusters are ignored.
pub fn oracle_lfk(x: &[BTreeSet<usize>], y: &[BTreeSet<usize>], n: usize) -> f64 {
    let x: Vec<_> = x.iter().filter(|c| !c.is_empty()).cloned().collect();
    let y: Vec<_> = y.iter().filter(|c| !c.is_empty()).cloned().collect();
    1.0 - 0.5 * (normalized_conditional(&x, &y, n) + normalized_conditional(&y, &x, n))
}

/// Random overlapping cover of `0..n`: every node joins one cluster, and a
/// few join a second.
pub fn random_cover(rng: &mut ChaCha8Rng, n: usize, clusters: usize, overlap: f64) -> Vec<BTreeSet<usize>> {
    let mut cover = vec![BTreeSet::new(); clusters];
    for node in 0..n {
        cover[rng.gen_range(0..clusters)].insert(node);
        if rng.gen_bool(overlap) {
            cover[rng.gen_range(0..clusters)].insert(node);
        }
    }
    cover.retain(|c| !c.is_empty());
    cover
}

pub fn as_ids(cover: &[BTreeSet<usize>]) -> Vec<BTreeSet<String>> {
    cover.iter().map(|c| c.iter().map(|i| format!("m{i:04}")).collect()).collect()
}

/// Dense confusion-free NMI of two hard partitions given as label vectors.
pub fn oracle_partition_nmi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut ma: BTreeMap<usize, f64> = BTreeMap::new();
    let mut mb: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *ma.entry(x).or_default() += 1.0;
        *mb.entry(y).or_default() += 1.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| (c / n) * ((c / n) / ((ma[&x] / n) * (mb[&y] / n))).ln())
        .sum();
    let h = |m: &BTreeMap<usize, f64>| m.values().map(|&c| plogp(c / n)).sum::<f64>();
    let denom = h(&ma) + h(&mb);
    if denom == 0.0 {
        1.0
    } else {
        2.0 * mi / denom
    }
}
