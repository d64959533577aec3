//! Projection of protomeme clusters back onto messages.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::hierarchical::Partition;
use crate::ingest::TweetRecord;
use crate::protomeme::{extract_entities, EntityKey, Protomeme, Stopwords};

/// Possibly overlapping clusters of message ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClusterCover {
    pub clusters: Vec<BTreeSet<String>>,
    /// Objects (protomeme or message indices) behind each cluster.
    #[serde(default)]
    pub sources: Vec<Vec<usize>>,
}

impl ClusterCover {
    pub fn from_sets(clusters: Vec<BTreeSet<String>>) -> Self {
        ClusterCover {
            clusters,
            sources: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn tweet_ids(&self) -> BTreeSet<&str> {
        self.clusters
            .iter()
            .flat_map(|c| c.iter().map(String::as_str))
            .collect()
    }

    /// Cluster indices of each message.
    pub fn memberships(&self) -> HashMap<&str, Vec<usize>> {
        let mut out: HashMap<&str, Vec<usize>> = HashMap::new();
        for (c, members) in self.clusters.iter().enumerate() {
            for t in members {
                out.entry(t.as_str()).or_default().push(c);
            }
        }
        out
    }
}

/// Each cluster's messages are the union of its protomemes' messages, so a
/// message whose protomemes land in different clusters belongs to all of them.
pub fn cover_from_partition(partition: &Partition, protomemes: &[Protomeme]) -> ClusterCover {
    let clusters = partition
        .clusters
        .iter()
        .map(|members| {
            members
                .iter()
                .flat_map(|&p| protomemes[p].tweet_ids.iter().cloned())
                .collect()
        })
        .collect();
    ClusterCover {
        clusters,
        sources: partition.clusters.clone(),
    }
}

/// Live entity -> cluster lookup used between clustering runs.
#[derive(Debug, Clone, Default)]
pub struct LiveIndex {
    clusters_by_key: HashMap<EntityKey, BTreeSet<usize>>,
}

impl LiveIndex {
    pub fn new(partition: &Partition, protomemes: &[Protomeme]) -> Self {
        let mut clusters_by_key: HashMap<EntityKey, BTreeSet<usize>> = HashMap::new();
        for (c, members) in partition.clusters.iter().enumerate() {
            for &p in members {
                clusters_by_key
                    .entry(protomemes[p].key.clone())
                    .or_default()
                    .insert(c);
            }
        }
        LiveIndex { clusters_by_key }
    }

    pub fn insert(&mut self, key: EntityKey, cluster: usize) {
        self.clusters_by_key.entry(key).or_default().insert(cluster);
    }

    pub fn clusters_of(&self, key: &EntityKey) -> Option<&BTreeSet<usize>> {
        self.clusters_by_key.get(key)
    }
}

/// Clusters of every existing protomeme whose entity the message carries.
pub fn assign_incoming(tweet: &TweetRecord, index: &LiveIndex, stopwords: &Stopwords) -> BTreeSet<usize> {
    extract_entities(tweet, stopwords)
        .iter()
        .filter_map(|k| index.clusters_of(k))
        .flatten()
        .copied()
        .collect()
}
