//! The evaluated configurations: tweet-level baselines and protomeme runs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::curve::Curve;
use super::followers::FollowerGraph;
use crate::clustering::{cut_to_count, hierarchical_cluster, spherical_kmeans, Dendrogram};
use crate::error::{Error, Result};
use crate::evaluation::{score_partition, score_sweep, GroundTruth, Sweep, TruthIndex};
use crate::exec::Execution;
use crate::ingest::TweetRecord;
use crate::protomeme::entities::{normalize_hashtag, phrase_tokens};
use crate::protomeme::{build_protomemes_with, inverse_document_frequency, term_counts, Protomeme, Stopwords};
use crate::similarity::{
    binary_cosine, intern_features, sorted_intersection_len, Combiner, Interner, SimilarityCache,
    SimilarityMatrix, SparseVector, DEFAULT_MATRIX_CAP,
};

/// Settings shared by every configuration.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stopwords: Stopwords,
    pub exec: Execution,
    /// Largest number of objects (protomemes or messages) to cluster.
    pub matrix_cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            stopwords: Stopwords::english(),
            exec: Execution::default(),
            matrix_cap: DEFAULT_MATRIX_CAP,
        }
    }
}

/// Ground truth restricted to the given messages, indexed for scoring.
pub fn truth_index_for(records: &[TweetRecord], truth: &GroundTruth) -> Result<TruthIndex> {
    let restricted = truth.restrict_to(records.iter().map(|r| r.tweet_id.as_str()));
    if restricted.is_empty() {
        return Err(Error::Empty("ground truth over these messages"));
    }
    Ok(TruthIndex::new(&restricted))
}

/// Term counts of a message as a plain document: its phrase tokens plus its
/// hashtags and mentioned users.
pub fn tweet_document(tweet: &TweetRecord, stopwords: &Stopwords) -> BTreeMap<String, u32> {
    let mut tokens = phrase_tokens(&tweet.text, stopwords);
    tokens.extend(tweet.hashtags.iter().map(|h| format!("#{}", normalize_hashtag(h))));
    tokens.extend(tweet.mentions.iter().map(|m| format!("@{}", m.trim_start_matches('@').to_lowercase())));
    term_counts(&tokens)
}

/// TF-IDF vector of every message, with the messages themselves as documents.
pub fn tweet_tfidf_vectors(records: &[TweetRecord], stopwords: &Stopwords) -> Vec<SparseVector> {
    let docs: Vec<BTreeMap<String, u32>> = records.iter().map(|t| tweet_document(t, stopwords)).collect();
    let idf = inverse_document_frequency(&docs, docs.len());
    let terms = Interner::from_sorted(idf.keys().map(String::as_str).collect());
    docs.iter()
        .map(|d| {
            SparseVector::new(
                d.iter()
                    .map(|(t, &c)| (terms.id(t), c as f64 * idf[t]))
                    .collect(),
            )
        })
        .collect()
}

fn check_size(n: usize, opts: &RunOptions) -> Result<()> {
    if n == 0 {
        return Err(Error::Empty("message window"));
    }
    if n > opts.matrix_cap {
        return Err(Error::TooLarge {
            what: "message window",
            actual: n,
            cap: opts.matrix_cap,
        });
    }
    Ok(())
}

/// Message-level TF-IDF cosine similarity.
pub fn baseline_matrix(records: &[TweetRecord], opts: &RunOptions) -> Result<SimilarityMatrix> {
    check_size(records.len(), opts)?;
    let vectors = tweet_tfidf_vectors(records, &opts.stopwords);
    Ok(SimilarityMatrix::from_pairs(records.len(), opts.exec, |i, j| {
        vectors[i].cosine(&vectors[j])
    }))
}

/// Equal-weight mix of message TF-IDF cosine and the binary cosine of the
/// authors' follower sets.
pub fn baseline_followers_matrix(
    records: &[TweetRecord],
    graph: Option<&FollowerGraph>,
    opts: &RunOptions,
) -> Result<SimilarityMatrix> {
    let graph = graph.ok_or_else(|| Error::config("the follower baseline needs a follower graph"))?;
    check_size(records.len(), opts)?;
    let vectors = tweet_tfidf_vectors(records, &opts.stopwords);
    let users = Interner::from_sorted(
        graph
            .followers
            .values()
            .flatten()
            .map(String::as_str)
            .collect::<BTreeSet<&str>>(),
    );
    let follower_ids: Vec<Vec<u32>> = records
        .iter()
        .map(|r| graph.followers_of(&r.author_id).iter().map(|f| users.id(f)).collect())
        .collect();
    Ok(SimilarityMatrix::from_pairs(records.len(), opts.exec, |i, j| {
        let (a, b) = (&follower_ids[i], &follower_ids[j]);
        let social = binary_cosine(sorted_intersection_len(a, b), a.len(), b.len());
        0.5 * vectors[i].cosine(&vectors[j]) + 0.5 * social
    }))
}

fn tweet_members(records: &[TweetRecord], index: &TruthIndex) -> Vec<Vec<u32>> {
    records
        .iter()
        .map(|r| index.get(&r.tweet_id).into_iter().collect())
        .collect()
}

fn tweet_curve(
    label: &str,
    records: &[TweetRecord],
    matrix: &SimilarityMatrix,
    truth: &GroundTruth,
    sweep: &Sweep,
) -> Result<Curve> {
    let index = truth_index_for(records, truth)?;
    let d = hierarchical_cluster(matrix)?;
    let points = score_sweep(&d, &tweet_members(records, &index), &index, sweep)?;
    Ok(Curve::new(label, points))
}

/// Hierarchical clustering of individual messages by TF-IDF cosine.
pub fn run_baseline(records: &[TweetRecord], truth: &GroundTruth, sweep: &Sweep, opts: &RunOptions) -> Result<Curve> {
    let m = baseline_matrix(records, opts)?;
    tweet_curve("baseline", records, &m, truth, sweep)
}

/// Hierarchical clustering of messages by text and follower-set similarity.
pub fn run_baseline_followers(
    records: &[TweetRecord],
    truth: &GroundTruth,
    graph: Option<&FollowerGraph>,
    sweep: &Sweep,
    opts: &RunOptions,
) -> Result<Curve> {
    let m = baseline_followers_matrix(records, graph, opts)?;
    tweet_curve("baseline+followers", records, &m, truth, sweep)
}

/// Protomemes of a window with their combiner-independent similarity vectors.
/// Built once and reused across combiners.
#[derive(Debug, Clone)]
pub struct ProtomemeSetup {
    pub protomemes: Vec<Protomeme>,
    pub cache: SimilarityCache,
}

impl ProtomemeSetup {
    pub fn new(records: &[TweetRecord], opts: &RunOptions) -> Result<Self> {
        let protomemes = build_protomemes_with(records, &opts.stopwords, opts.exec);
        Self::from_protomemes(protomemes, opts)
    }

    pub fn from_protomemes(protomemes: Vec<Protomeme>, opts: &RunOptions) -> Result<Self> {
        if protomemes.is_empty() {
            return Err(Error::Empty("protomeme set"));
        }
        let cache = SimilarityCache::compute_with(&protomemes, opts.matrix_cap, opts.exec)?;
        Ok(Self { protomemes, cache })
    }

    pub fn len(&self) -> usize {
        self.protomemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.protomemes.is_empty()
    }

    /// Labeled messages of each protomeme, in `index` space.
    pub fn members(&self, index: &TruthIndex) -> Vec<Vec<u32>> {
        self.protomemes
            .iter()
            .map(|p| index.members(p.tweet_ids.iter().map(String::as_str)))
            .collect()
    }

    pub fn dendrogram(&self, combiner: &Combiner) -> Result<Dendrogram> {
        hierarchical_cluster(&self.cache.combine(combiner))
    }

    pub fn curve(&self, combiner: &Combiner, index: &TruthIndex, members: &[Vec<u32>], sweep: &Sweep) -> Result<Curve> {
        let d = self.dendrogram(combiner)?;
        let points = score_sweep(&d, members, index, sweep)?;
        Ok(Curve::new(combiner.to_string(), points))
    }
}

/// Hierarchical clustering of protomemes under one combiner, scored on the
/// message cover each cut induces.
pub fn run_protomeme_config(
    records: &[TweetRecord],
    truth: &GroundTruth,
    combiner: &Combiner,
    sweep: &Sweep,
    opts: &RunOptions,
) -> Result<Curve> {
    let setup = ProtomemeSetup::new(records, opts)?;
    let index = truth_index_for(records, truth)?;
    let members = setup.members(&index);
    setup.curve(combiner, &index, &members, sweep)
}

/// LFK-NMI of hierarchical and K-means clustering at the same cluster counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmComparison {
    pub counts: Vec<usize>,
    pub hierarchical: Vec<f64>,
    pub kmeans: Vec<f64>,
}

impl AlgorithmComparison {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cluster_count", "hierarchical_lfk_nmi", "kmeans_lfk_nmi"])?;
        for i in 0..self.counts.len() {
            w.write_record([
                self.counts[i].to_string(),
                format!("{}", self.hierarchical[i]),
                format!("{}", self.kmeans[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Clusters protomemes by content similarity alone, hierarchically (cut to
/// exactly `k` clusters) and with spherical K-means (best of `runs` restarts
/// by objective), for every `k` in `counts`.
pub fn compare_algorithms(
    records: &[TweetRecord],
    truth: &GroundTruth,
    counts: &[usize],
    runs: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<AlgorithmComparison> {
    let setup = ProtomemeSetup::new(records, opts)?;
    let index = truth_index_for(records, truth)?;
    let members = setup.members(&index);
    let d = setup.dendrogram(&Combiner::Single {
        measure: crate::similarity::Measure::Content,
    })?;
    let vectors: Vec<SparseVector> = intern_features(&setup.protomemes).into_iter().map(|f| f.terms).collect();
    let counts: Vec<usize> = counts.iter().copied().filter(|&k| k >= 1 && k <= setup.len()).collect();
    let mut hierarchical = Vec::with_capacity(counts.len());
    let mut kmeans = Vec::with_capacity(counts.len());
    for &k in &counts {
        hierarchical.push(score_partition(&cut_to_count(&d, k), &members, &index)?);
        let km = spherical_kmeans(&vectors, k, runs, seed, opts.exec)?;
        kmeans.push(score_partition(&km.best().partition, &members, &index)?);
    }
    Ok(AlgorithmComparison {
        counts,
        hierarchical,
        kmeans,
    })
}
