//! Combined metric report for one predicted cover.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lfk::{lfk_nmi, LFK_VARIANT};
use super::nmi::{confusion, nmi};
use super::truth::GroundTruth;
use crate::clustering::ClusterCover;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub nmi: f64,
    pub lfk_nmi: f64,
    pub lfk_variant: String,
    pub cluster_count: usize,
    /// cluster size -> number of clusters of that size
    pub size_histogram: BTreeMap<usize, usize>,
    pub labeled_messages: usize,
    pub topics: usize,
}

pub fn evaluate(truth: &GroundTruth, cover: &ClusterCover) -> Result<MetricReport> {
    let mut size_histogram = BTreeMap::new();
    for c in &cover.clusters {
        *size_histogram.entry(c.len()).or_insert(0) += 1;
    }
    Ok(MetricReport {
        nmi: nmi(&confusion(truth, cover))?,
        lfk_nmi: lfk_nmi(truth, cover)?,
        lfk_variant: LFK_VARIANT.to_string(),
        cluster_count: cover.len(),
        size_histogram,
        labeled_messages: truth.tweet_count(),
        topics: truth.len(),
    })
}
