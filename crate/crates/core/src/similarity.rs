//! Pairwise protomeme similarity measures and their combinations.
//!
//! All four measures are cosines: over user frequency vectors, binary message
//! vectors, TF-IDF content vectors, and binary diffusion vectors. A cosine with
//! a zero-norm operand is 0. Sums run in ascending key order so results are
//! reproducible bit for bit; the interned fast path used for whole matrices
//! preserves that order and therefore matches the scalar functions exactly.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::protomeme::{EntityKey, Protomeme};

/// Largest protomeme set for which a dense matrix is built by default.
pub const DEFAULT_MATRIX_CAP: usize = 20_000;

/// Tolerance on the unit-sum constraint of [`WeightVector`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Tweet,
    User,
    Content,
    Diffusion,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::Tweet,
        Measure::User,
        Measure::Content,
        Measure::Diffusion,
    ];

    pub fn letter(self) -> char {
        match self {
            Measure::Tweet => 't',
            Measure::User => 'u',
            Measure::Content => 'c',
            Measure::Diffusion => 'd',
        }
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" | "tweet" => Ok(Measure::Tweet),
            "u" | "user" => Ok(Measure::User),
            "c" | "content" => Ok(Measure::Content),
            "d" | "diffusion" => Ok(Measure::Diffusion),
            other => Err(Error::config(format!("unknown similarity measure `{other}`"))),
        }
    }
}

/// The four measures for one protomeme pair, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimilarityVector {
    pub tweet: f64,
    pub user: f64,
    pub content: f64,
    pub diffusion: f64,
}

impl SimilarityVector {
    pub fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::Tweet => self.tweet,
            Measure::User => self.user,
            Measure::Content => self.content,
            Measure::Diffusion => self.diffusion,
        }
    }

    pub fn uniform(v: f64) -> Self {
        SimilarityVector {
            tweet: v,
            user: v,
            content: v,
            diffusion: v,
        }
    }
}

/// Non-negative weights of a linear combination summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub tweet: f64,
    pub content: f64,
    pub user: f64,
    pub diffusion: f64,
}

impl WeightVector {
    /// Validates and builds weights given in `t, c, u, d` order.
    pub fn from_tcud(w: [f64; 4]) -> Result<Self> {
        let v = WeightVector {
            tweet: w[0],
            content: w[1],
            user: w[2],
            diffusion: w[3],
        };
        v.validate()?;
        Ok(v)
    }

    pub fn as_tcud(&self) -> [f64; 4] {
        [self.tweet, self.content, self.user, self.diffusion]
    }

    pub fn equal() -> Self {
        WeightVector {
            tweet: 0.25,
            content: 0.25,
            user: 0.25,
            diffusion: 0.25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_tcud();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::config(format!("weights must be non-negative: {self}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::config(format!("weights must sum to 1, got {sum} ({self})")));
        }
        Ok(())
    }

    pub fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::Tweet => self.tweet,
            Measure::User => self.user,
            Measure::Content => self.content,
            Measure::Diffusion => self.diffusion,
        }
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.tweet, self.content, self.user, self.diffusion
        )
    }
}

impl FromStr for WeightVector {
    type Err = Error;

    /// Parses `t,c,u,d`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::config(format!("bad weight `{p}`: {e}")))
            })
            .collect::<Result<_>>()?;
        let arr: [f64; 4] = parts
            .try_into()
            .map_err(|_| Error::config("expected four weights `t,c,u,d`"))?;
        WeightVector::from_tcud(arr)
    }
}

pub fn max_combine(v: &SimilarityVector) -> f64 {
    v.tweet.max(v.user).max(v.content).max(v.diffusion)
}

pub fn linear_combine(v: &SimilarityVector, w: &WeightVector) -> f64 {
    let s = w.tweet * v.tweet + w.content * v.content + w.user * v.user + w.diffusion * v.diffusion;
    s.clamp(0.0, 1.0)
}

/// How a [`SimilarityVector`] is reduced to one score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum Combiner {
    Max,
    Linear { weights: WeightVector },
    Single { measure: Measure },
}

impl Combiner {
    pub fn linear(weights: WeightVector) -> Self {
        Combiner::Linear { weights }
    }

    pub fn apply(&self, v: &SimilarityVector) -> f64 {
        match self {
            Combiner::Max => max_combine(v),
            Combiner::Linear { weights } => linear_combine(v, weights),
            Combiner::Single { measure } => v.get(*measure),
        }
    }
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Combiner::Max => f.write_str("max"),
            Combiner::Linear { weights } => write!(f, "linear:{weights}"),
            Combiner::Single { measure } => write!(f, "single:{}", measure.letter()),
        }
    }
}

impl FromStr for Combiner {
    type Err = Error;

    /// `max`, `single:<t|u|c|d>`, or `linear:t,c,u,d`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "max" {
            return Ok(Combiner::Max);
        }
        if let Some(m) = s.strip_prefix("single:") {
            return Ok(Combiner::Single { measure: m.parse()? });
        }
        if let Some(w) = s.strip_prefix("linear:") {
            return Ok(Combiner::linear(w.parse()?));
        }
        if s == "linear" {
            return Err(Error::config("linear combiner needs weights `t,c,u,d`"));
        }
        Err(Error::config(format!("unknown combiner `{s}`")))
    }
}

// ---------------------------------------------------------------------------
// cosine kernels

/// Dot product of two key-sorted sparse vectors.
pub fn sparse_dot<K: Ord>(
    a: impl IntoIterator<Item = (K, f64)>,
    b: impl IntoIterator<Item = (K, f64)>,
) -> f64 {
    let mut a = a.into_iter().peekable();
    let mut b = b.into_iter().peekable();
    let mut dot = 0.0;
    while let (Some((ka, _)), Some((kb, _))) = (a.peek(), b.peek()) {
        match ka.cmp(kb) {
            std::cmp::Ordering::Less => {
                a.next();
            }
            std::cmp::Ordering::Greater => {
                b.next();
            }
            std::cmp::Ordering::Equal => {
                let (_, va) = a.next().unwrap();
                let (_, vb) = b.next().unwrap();
                dot += va * vb;
            }
        }
    }
    dot
}

pub fn norm_sq(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().map(|v| v * v).sum()
}

/// `dot / sqrt(|a|^2 |b|^2)`, 0 for a zero-norm operand, clamped to `[0, 1]`.
pub fn cosine_from_parts(dot: f64, norm_sq_a: f64, norm_sq_b: f64) -> f64 {
    if norm_sq_a <= 0.0 || norm_sq_b <= 0.0 {
        return 0.0;
    }
    (dot / (norm_sq_a * norm_sq_b).sqrt()).clamp(0.0, 1.0)
}

/// Size of the intersection of two sorted sequences.
pub fn sorted_intersection_len<K: Ord>(
    a: impl IntoIterator<Item = K>,
    b: impl IntoIterator<Item = K>,
) -> usize {
    let mut a = a.into_iter().peekable();
    let mut b = b.into_iter().peekable();
    let mut n = 0;
    while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
        match x.cmp(y) {
            std::cmp::Ordering::Less => {
                a.next();
            }
            std::cmp::Ordering::Greater => {
                b.next();
            }
            std::cmp::Ordering::Equal => {
                n += 1;
                a.next();
                b.next();
            }
        }
    }
    n
}

/// Cosine of two binary vectors given as sets.
pub fn binary_cosine(intersection: usize, len_a: usize, len_b: usize) -> f64 {
    if len_a == 0 || len_b == 0 {
        return 0.0;
    }
    (intersection as f64 / ((len_a * len_b) as f64).sqrt()).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// scalar measures

/// Cosine between user frequency vectors.
pub fn common_user_similarity(pi: &Protomeme, pj: &Protomeme) -> f64 {
    let as_f = |p: &Protomeme| p.user_freq.iter().map(|(u, &c)| (u.clone(), c as f64)).collect::<Vec<_>>();
    let (a, b) = (as_f(pi), as_f(pj));
    cosine_from_parts(
        sparse_dot(a.iter().map(|(k, v)| (k, *v)), b.iter().map(|(k, v)| (k, *v))),
        norm_sq(a.iter().map(|x| x.1)),
        norm_sq(b.iter().map(|x| x.1)),
    )
}

/// Cosine between binary message vectors.
pub fn common_tweet_similarity(pi: &Protomeme, pj: &Protomeme) -> f64 {
    binary_cosine(
        sorted_intersection_len(&pi.tweet_ids, &pj.tweet_ids),
        pi.tweet_ids.len(),
        pj.tweet_ids.len(),
    )
}

/// Cosine between TF-IDF vectors.
pub fn content_similarity(pi: &Protomeme, pj: &Protomeme) -> f64 {
    cosine_from_parts(
        sparse_dot(
            pi.term_weights.iter().map(|(k, &v)| (k, v)),
            pj.term_weights.iter().map(|(k, &v)| (k, v)),
        ),
        norm_sq(pi.term_weights.values().copied()),
        norm_sq(pj.term_weights.values().copied()),
    )
}

/// Cosine between binary diffusion vectors.
pub fn diffusion_similarity(pi: &Protomeme, pj: &Protomeme) -> f64 {
    binary_cosine(
        sorted_intersection_len(&pi.diffusion_set, &pj.diffusion_set),
        pi.diffusion_set.len(),
        pj.diffusion_set.len(),
    )
}

pub fn similarity_vector(pi: &Protomeme, pj: &Protomeme) -> SimilarityVector {
    SimilarityVector {
        tweet: common_tweet_similarity(pi, pj),
        user: common_user_similarity(pi, pj),
        content: content_similarity(pi, pj),
        diffusion: diffusion_similarity(pi, pj),
    }
}

// ---------------------------------------------------------------------------
// interned features for whole-matrix computation

/// A sparse vector over interned ids, sorted by id, with its squared norm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    pub entries: Vec<(u32, f64)>,
    pub norm_sq: f64,
}

impl SparseVector {
    pub fn new(entries: Vec<(u32, f64)>) -> Self {
        let norm_sq = norm_sq(entries.iter().map(|e| e.1));
        SparseVector { entries, norm_sq }
    }

    pub fn cosine(&self, other: &SparseVector) -> f64 {
        cosine_from_parts(
            sparse_dot(self.entries.iter().copied(), other.entries.iter().copied()),
            self.norm_sq,
            other.norm_sq,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sq <= 0.0
    }
}

/// Interns strings so that id order equals string order.
#[derive(Debug, Default)]
pub struct Interner {
    ids: HashMap<String, u32>,
}

impl Interner {
    pub fn from_sorted(all: BTreeSet<&str>) -> Self {
        Interner {
            ids: all
                .into_iter()
                .enumerate()
                .map(|(i, s)| (s.to_string(), i as u32))
                .collect(),
        }
    }

    pub fn id(&self, s: &str) -> u32 {
        self.ids[s]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Protomeme projections over interned ids.
#[derive(Debug, Clone)]
pub struct ProtomemeFeatures {
    pub tweets: Vec<u32>,
    pub users: SparseVector,
    pub terms: SparseVector,
    pub diffusion: Vec<u32>,
}

impl ProtomemeFeatures {
    pub fn similarity(&self, other: &ProtomemeFeatures) -> SimilarityVector {
        SimilarityVector {
            tweet: binary_cosine(
                sorted_intersection_len(&self.tweets, &other.tweets),
                self.tweets.len(),
                other.tweets.len(),
            ),
            user: self.users.cosine(&other.users),
            content: self.terms.cosine(&other.terms),
            diffusion: binary_cosine(
                sorted_intersection_len(&self.diffusion, &other.diffusion),
                self.diffusion.len(),
                other.diffusion.len(),
            ),
        }
    }
}

pub fn intern_features(protomemes: &[Protomeme]) -> Vec<ProtomemeFeatures> {
    let tweets = Interner::from_sorted(
        protomemes
            .iter()
            .flat_map(|p| p.tweet_ids.iter().map(String::as_str))
            .collect(),
    );
    let users = Interner::from_sorted(
        protomemes
            .iter()
            .flat_map(|p| {
                p.user_freq
                    .keys()
                    .chain(p.diffusion_set.iter())
                    .map(String::as_str)
            })
            .collect(),
    );
    let terms = Interner::from_sorted(
        protomemes
            .iter()
            .flat_map(|p| p.term_weights.keys().map(String::as_str))
            .collect(),
    );
    protomemes
        .iter()
        .map(|p| ProtomemeFeatures {
            tweets: p.tweet_ids.iter().map(|t| tweets.id(t)).collect(),
            users: SparseVector::new(
                p.user_freq
                    .iter()
                    .map(|(u, &c)| (users.id(u), c as f64))
                    .collect(),
            ),
            terms: SparseVector::new(
                p.term_weights
                    .iter()
                    .map(|(t, &w)| (terms.id(t), w))
                    .collect(),
            ),
            diffusion: p.diffusion_set.iter().map(|u| users.id(u)).collect(),
        })
        .collect()
}

/// Index of the pair `(i, j)`, `i < j`, in a row-major strict upper triangle.
fn triangle_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Combiner-independent [`SimilarityVector`] for every protomeme pair.
#[derive(Debug, Clone)]
pub struct SimilarityCache {
    n: usize,
    upper: Vec<SimilarityVector>,
}

impl SimilarityCache {
    pub fn compute(protomemes: &[Protomeme]) -> Result<Self> {
        Self::compute_with(protomemes, DEFAULT_MATRIX_CAP, Execution::default())
    }

    pub fn compute_with(protomemes: &[Protomeme], cap: usize, exec: Execution) -> Result<Self> {
        let n = protomemes.len();
        if n > cap {
            return Err(Error::TooLarge {
                what: "protomeme set",
                actual: n,
                cap,
            });
        }
        let features = intern_features(protomemes);
        let rows = exec.map_range(n, |i| {
            let fi = &features[i];
            features[i + 1..]
                .iter()
                .map(|fj| fi.similarity(fj))
                .collect::<Vec<_>>()
        });
        Ok(SimilarityCache {
            n,
            upper: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Vector for a pair of distinct protomemes, in either order.
    pub fn get(&self, i: usize, j: usize) -> SimilarityVector {
        assert!(i != j, "no similarity vector for a protomeme with itself");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.upper[triangle_index(self.n, a, b)]
    }

    pub fn combine(&self, combiner: &Combiner) -> SimilarityMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        let mut idx = 0;
        for i in 0..n {
            data[i * n + i] = 1.0;
            for j in i + 1..n {
                let s = combiner.apply(&self.upper[idx]);
                data[i * n + j] = s;
                data[j * n + i] = s;
                idx += 1;
            }
        }
        SimilarityMatrix { n, data }
    }
}

/// Dense symmetric similarity matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds a matrix from rows; must be square, symmetric, and finite.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            data.extend_from_slice(row);
        }
        let m = SimilarityMatrix { n, data };
        m.validate()?;
        Ok(m)
    }

    /// Fills the upper triangle with `f(i, j)`, mirrors it, and sets a unit
    /// diagonal. Rows are evaluated with `exec`.
    pub fn from_pairs<F>(n: usize, exec: Execution, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync + Send,
    {
        let rows = exec.map_range(n, |i| (i + 1..n).map(|j| f(i, j)).collect::<Vec<_>>());
        let mut data = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            data[i * n + i] = 1.0;
            for (off, s) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                data[i * n + j] = s;
                data[j * n + i] = s;
            }
        }
        SimilarityMatrix { n, data }
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                if !v.is_finite() {
                    return Err(Error::invalid(format!("non-finite similarity at ({i}, {j})")));
                }
                if v != self.get(j, i) {
                    return Err(Error::invalid(format!("similarity matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// CSV with a header mapping each index to its entity key, then one row
    /// per protomeme: `index,key,s_0,...,s_{n-1}`.
    pub fn write_csv<W: Write>(&self, keys: &[EntityKey], out: W) -> Result<()> {
        if keys.len() != self.n {
            return Err(Error::invalid("key count does not match matrix size"));
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["index".to_string(), "key".to_string()];
        header.extend((0..self.n).map(|i| i.to_string()));
        w.write_record(&header)?;
        for (i, key) in keys.iter().enumerate() {
            let mut rec = vec![i.to_string(), key.to_string()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Combined similarity matrix over protomemes.
pub fn similarity_matrix(protomemes: &[Protomeme], combiner: &Combiner) -> Result<SimilarityMatrix> {
    Ok(SimilarityCache::compute(protomemes)?.combine(combiner))
}
