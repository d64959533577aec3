//! K-fold cross-validation of the linear-combination weights.
//!
//! Weights are selected on the training folds only (protomemes, TF-IDF and
//! ground truth all restricted to the training messages) and then applied to
//! the held-out fold, whose messages are clustered and scored on their own.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::configs::{truth_index_for, ProtomemeSetup, RunOptions};
use super::curve::{average_curves, Curve, MeanPoint};
use super::grid::{enumerate_simplex, grid_search_with, GridResult};
use crate::error::{Error, Result};
use crate::evaluation::{GroundTruth, Sweep};
use crate::ingest::TweetRecord;
use crate::similarity::{Combiner, WeightVector};

/// Fold of each message, stratified by its first ground-truth topic.
///
/// Messages are grouped by their lowest-index topic (unlabeled messages form
/// a last group), shuffled within each group, and the groups are laid end to
/// end; position `p` goes to fold `p mod folds`. Fold sizes therefore differ
/// by at most one, and so does each topic's share of every fold.
pub fn assign_folds(tweet_ids: &[String], truth: &GroundTruth, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::config(format!("cross-validation needs at least 2 folds, got {folds}")));
    }
    if tweet_ids.len() < folds {
        return Err(Error::invalid(format!(
            "{} messages cannot fill {folds} folds",
            tweet_ids.len()
        )));
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (pos, id) in tweet_ids.iter().enumerate() {
        let group = truth
            .labels
            .get(id)
            .and_then(|ls| ls.first().copied())
            .unwrap_or(usize::MAX);
        groups.entry(group).or_default().push(pos);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; tweet_ids.len()];
    let mut p = 0;
    for members in groups.values_mut() {
        members.shuffle(&mut rng);
        for &m in members.iter() {
            assignment[m] = p % folds;
            p += 1;
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub grid_step: f64,
    /// Thresholds at which held-out curves are scored and averaged.
    pub thresholds: Vec<f64>,
}

impl Default for CvConfig {
    fn default() -> Self {
        let Sweep::Thresholds(thresholds) = Sweep::grid(0.05) else {
            unreachable!()
        };
        Self {
            folds: 5,
            seed: 0,
            grid_step: 0.1,
            thresholds,
        }
    }
}

/// Grid search restricted to `train`: nothing about other messages, their
/// text or their labels, reaches the selection.
pub fn select_weights(
    train: &[TweetRecord],
    truth: &GroundTruth,
    grid_step: f64,
    opts: &RunOptions,
) -> Result<(WeightVector, GridResult)> {
    let train_truth = truth.restrict_to(train.iter().map(|r| r.tweet_id.as_str()));
    let setup = ProtomemeSetup::new(train, opts)?;
    let index = truth_index_for(train, &train_truth)?;
    let result = grid_search_with(&setup, &index, &enumerate_simplex(grid_step)?, opts)?;
    Ok((result.best_weights(), result))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub weights: WeightVector,
    pub train_best_lfk_nmi: f64,
    pub linear: Curve,
    pub max: Curve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    pub linear_mean: Vec<MeanPoint>,
    pub max_mean: Vec<MeanPoint>,
}

/// Splits `records` into folds, selects weights on each training split, and
/// scores the held-out fold at the configured thresholds.
pub fn cross_validate(
    records: &[TweetRecord],
    truth: &GroundTruth,
    cfg: &CvConfig,
    opts: &RunOptions,
) -> Result<CvResult> {
    if cfg.thresholds.is_empty() {
        return Err(Error::config("cross-validation needs at least one threshold"));
    }
    let ids: Vec<String> = records.iter().map(|r| r.tweet_id.clone()).collect();
    let assignment = assign_folds(&ids, truth, cfg.folds, cfg.seed)?;
    let sweep = Sweep::Thresholds(cfg.thresholds.clone());
    let mut folds = Vec::with_capacity(cfg.folds);
    for fold in 0..cfg.folds {
        let (mut test, mut train) = (Vec::new(), Vec::new());
        for (r, &f) in records.iter().zip(&assignment) {
            if f == fold {
                test.push(r.clone());
            } else {
                train.push(r.clone());
            }
        }
        let (weights, grid) = select_weights(&train, truth, cfg.grid_step, opts)?;
        let test_truth = truth.restrict_to(test.iter().map(|r| r.tweet_id.as_str()));
        if test_truth.is_empty() {
            log::warn!("fold {fold} has no labeled messages; skipped");
            continue;
        }
        let setup = ProtomemeSetup::new(&test, opts)?;
        let index = truth_index_for(&test, &test_truth)?;
        let members = setup.members(&index);
        let linear = setup.curve(&Combiner::linear(weights), &index, &members, &sweep)?;
        let max = setup.curve(&Combiner::Max, &index, &members, &sweep)?;
        log::info!(
            "fold {fold}: weights {weights}, train LFK-NMI {:.4}, held-out peak {:.4}",
            grid.best_row().best_lfk_nmi,
            linear.peak_lfk()
        );
        folds.push(FoldResult {
            fold,
            train_size: train.len(),
            test_size: test.len(),
            weights,
            train_best_lfk_nmi: grid.best_row().best_lfk_nmi,
            linear,
            max,
        });
    }
    if folds.is_empty() {
        return Err(Error::Empty("cross-validation folds with labeled messages"));
    }
    let linear: Vec<Curve> = folds.iter().map(|f| f.linear.clone()).collect();
    let max: Vec<Curve> = folds.iter().map(|f| f.max.clone()).collect();
    Ok(CvResult {
        linear_mean: average_curves(&linear),
        max_mean: average_curves(&max),
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i:02}")).collect()
    }

    #[test]
    fn ten_messages_five_equal_folds() {
        let ids = ids(10);
        let truth = GroundTruth::from_assignments(ids.iter().map(|i| (i.clone(), vec!["A"])));
        let a = assign_folds(&ids, &truth, 5, 7).unwrap();
        let mut sizes = [0; 5];
        a.iter().for_each(|&f| sizes[f] += 1);
        assert_eq!(sizes, [2; 5]);
    }

    #[test]
    fn topic_of_five_spreads_over_folds() {
        let ids = ids(23);
        let truth = GroundTruth::from_assignments(ids.iter().enumerate().map(|(i, id)| {
            (id.clone(), vec![if i < 5 { "small" } else { "big" }])
        }));
        let a = assign_folds(&ids, &truth, 5, 3).unwrap();
        let mut per_fold = [0; 5];
        (0..5).for_each(|i| per_fold[a[i]] += 1);
        assert_eq!(per_fold, [1; 5]);
    }

    #[test]
    fn same_seed_same_assignment() {
        let ids = ids(40);
        let truth = GroundTruth::from_assignments(
            ids.iter().enumerate().map(|(i, id)| (id.clone(), vec![format!("T{}", i % 3)])),
        );
        assert_eq!(assign_folds(&ids, &truth, 5, 9).unwrap(), assign_folds(&ids, &truth, 5, 9).unwrap());
        assert_ne!(assign_folds(&ids, &truth, 5, 9).unwrap(), assign_folds(&ids, &truth, 5, 10).unwrap());
    }

    #[test]
    fn fewer_than_two_folds_rejected() {
        let ids = ids(4);
        assert!(assign_folds(&ids, &GroundTruth::default(), 1, 0).is_err());
    }
}
