//! Overlapping ground truth: message id -> one or more topic labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub label: String,
    pub tweets: BTreeSet<String>,
}

/// Reference topics; topic order is the order labels first appear.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub topics: Vec<Topic>,
    /// Topic indices of each labeled message, ascending.
    pub labels: BTreeMap<String, Vec<usize>>,
}

impl GroundTruth {
    /// Builds from `(message, labels)` rows; repeated rows merge their labels.
    pub fn from_assignments<I, S, L>(rows: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<L>)>,
        S: Into<String>,
        L: Into<String>,
    {
        let mut topic_of: HashMap<String, usize> = HashMap::new();
        let mut truth = GroundTruth::default();
        for (tweet, labels) in rows {
            let tweet = tweet.into();
            for label in labels {
                let label = label.into();
                let idx = *topic_of.entry(label.clone()).or_insert_with(|| {
                    truth.topics.push(Topic {
                        label,
                        tweets: BTreeSet::new(),
                    });
                    truth.topics.len() - 1
                });
                truth.topics[idx].tweets.insert(tweet.clone());
                let ls = truth.labels.entry(tweet.clone()).or_default();
                if let Err(pos) = ls.binary_search(&idx) {
                    ls.insert(pos, idx);
                }
            }
        }
        truth
    }

    /// Builds from topic sets, labelled by their position.
    pub fn from_topics(topics: Vec<BTreeSet<String>>) -> Self {
        let rows = topics.iter().enumerate().flat_map(|(i, t)| {
            t.iter().map(move |id| (id.clone(), vec![format!("topic{i}")]))
        });
        let mut truth = Self::from_assignments(rows);
        // keep the caller's topic order even if some topic repeats a member
        let order: HashMap<String, usize> =
            (0..topics.len()).map(|i| (format!("topic{i}"), i)).collect();
        truth.topics.sort_by_key(|t| order[&t.label]);
        truth.rebuild_labels();
        truth
    }

    fn rebuild_labels(&mut self) {
        self.labels.clear();
        for (i, t) in self.topics.iter().enumerate() {
            for id in &t.tweets {
                self.labels.entry(id.clone()).or_default().push(i);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn tweet_count(&self) -> usize {
        self.labels.len()
    }

    pub fn tweet_ids(&self) -> impl Iterator<Item = &str> {
        self.labels.keys().map(String::as_str)
    }

    /// Keeps only the given messages. Topics left empty are dropped with a
    /// warning; the survivors are ordered by label.
    pub fn restrict_to<'a>(&self, keep: impl IntoIterator<Item = &'a str>) -> Self {
        let keep: BTreeSet<&str> = keep.into_iter().collect();
        let mut topics = Vec::new();
        for t in &self.topics {
            let tweets: BTreeSet<String> = t
                .tweets
                .iter()
                .filter(|id| keep.contains(id.as_str()))
                .cloned()
                .collect();
            if tweets.is_empty() {
                log::warn!("topic `{}` has no messages in this subset; skipped", t.label);
                continue;
            }
            topics.push(Topic {
                label: t.label.clone(),
                tweets,
            });
        }
        // Order by label so the subset's view never depends on where excluded
        // messages put a label first.
        topics.sort_by(|a, b| a.label.cmp(&b.label));
        let mut truth = GroundTruth {
            topics,
            labels: BTreeMap::new(),
        };
        truth.rebuild_labels();
        truth
    }

    /// Tab-separated `tweet_id<TAB>label[,label...]` lines.
    pub fn to_tsv(&self) -> String {
        self.labels
            .iter()
            .map(|(id, ls)| {
                let labels: Vec<&str> = ls.iter().map(|&i| self.topics[i].label.as_str()).collect();
                format!("{id}\t{}\n", labels.join(","))
            })
            .collect()
    }
}

/// Reads `tweet_id<TAB>label[,label...]` lines. Blank lines and `#` comments
/// are skipped.
pub fn load_ground_truth<R: BufRead>(input: R) -> Result<GroundTruth> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (id, labels) = trimmed.split_once('\t').ok_or_else(|| {
            Error::invalid(format!("ground truth line {}: expected `id<TAB>labels`", i + 1))
        })?;
        let labels: Vec<String> = labels
            .split(',')
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        if id.trim().is_empty() || labels.is_empty() {
            return Err(Error::invalid(format!(
                "ground truth line {}: empty id or label list",
                i + 1
            )));
        }
        rows.push((id.trim().to_string(), labels));
    }
    Ok(GroundTruth::from_assignments(rows))
}

pub fn load_ground_truth_file(path: &Path) -> Result<GroundTruth> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_ground_truth(std::io::BufReader::new(file))
}

/// Per topic, the fraction of its messages that carry at least one other label.
pub fn overlap_ratio(truth: &GroundTruth) -> Vec<f64> {
    truth
        .topics
        .iter()
        .map(|t| {
            let shared = t.tweets.iter().filter(|id| truth.labels[*id].len() >= 2).count();
            shared as f64 / t.tweets.len() as f64
        })
        .collect()
}
