//! Exhaustive search over linear-combination weights on a simplex grid.

use serde::{Deserialize, Serialize};

use super::configs::{truth_index_for, ProtomemeSetup, RunOptions};
use crate::error::{Error, Result};
use crate::evaluation::{GroundTruth, ScoredCut, Sweep, TruthIndex};
use crate::ingest::TweetRecord;
use crate::similarity::{Combiner, WeightVector};

/// Every non-negative weight vector whose components are multiples of `step`
/// and sum to 1, enumerated in nested `t, c, u, d` order.
pub fn enumerate_simplex(step: f64) -> Result<Vec<WeightVector>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::config(format!("simplex step must be in (0, 1], got {step}")));
    }
    let m = (1.0 / step).round();
    if (m * step - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!("simplex step {step} does not divide 1")));
    }
    let m = m as usize;
    let mf = m as f64;
    let mut out = Vec::new();
    for t in 0..=m {
        for c in 0..=m - t {
            for u in 0..=m - t - c {
                let d = m - t - c - u;
                out.push(WeightVector::from_tcud([
                    t as f64 / mf,
                    c as f64 / mf,
                    u as f64 / mf,
                    d as f64 / mf,
                ])?);
            }
        }
    }
    Ok(out)
}

/// Best cut of one configuration over a full threshold sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub combiner: Combiner,
    pub best_lfk_nmi: f64,
    pub tau: Option<f64>,
    pub cluster_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    /// One row per weight vector, in enumeration order.
    pub rows: Vec<GridRow>,
    /// Index of the best row; the first maximum wins ties.
    pub best: usize,
    /// The MAX combiner, scored as an independent run.
    pub max_combiner: GridRow,
}

impl GridResult {
    pub fn best_row(&self) -> &GridRow {
        &self.rows[self.best]
    }

    pub fn best_weights(&self) -> WeightVector {
        match self.best_row().combiner {
            Combiner::Linear { weights } => weights,
            _ => unreachable!("grid rows are linear combinations"),
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["w_t", "w_c", "w_u", "w_d", "best_lfk_nmi", "tau", "cluster_count"])?;
        for r in &self.rows {
            let Combiner::Linear { weights } = r.combiner else { continue };
            let [t, c, u, d] = weights.as_tcud();
            w.write_record([
                format!("{t}"),
                format!("{c}"),
                format!("{u}"),
                format!("{d}"),
                format!("{}", r.best_lfk_nmi),
                r.tau.map(|t| format!("{t}")).unwrap_or_default(),
                r.cluster_count.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn best_of(setup: &ProtomemeSetup, combiner: Combiner, index: &TruthIndex, members: &[Vec<u32>]) -> Result<GridRow> {
    let curve = setup.curve(&combiner, index, members, &Sweep::Full)?;
    // Lumping every message together scores a weight-independent constant
    // against multi-topic truth, so that cut cannot inform the choice.
    let min_clusters = if index.topic_count() > 1 { 2 } else { 1 };
    let peak: &ScoredCut = curve
        .peak_with_at_least(min_clusters)
        .expect("a full sweep has at least one cut");
    Ok(GridRow {
        combiner,
        best_lfk_nmi: peak.lfk_nmi,
        tau: peak.tau,
        cluster_count: peak.cluster_count,
    })
}

/// Scores every weight vector on prepared protomemes.
pub fn grid_search_with(
    setup: &ProtomemeSetup,
    index: &TruthIndex,
    weights: &[WeightVector],
    opts: &RunOptions,
) -> Result<GridResult> {
    if weights.is_empty() {
        return Err(Error::Empty("weight grid"));
    }
    let members = setup.members(index);
    let rows = opts
        .exec
        .try_map_slice(weights, |w| best_of(setup, Combiner::linear(*w), index, &members))?;
    let best = rows
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.best_lfk_nmi > rows[b].best_lfk_nmi { i } else { b });
    let max_combiner = best_of(setup, Combiner::Max, index, &members)?;
    Ok(GridResult {
        rows,
        best,
        max_combiner,
    })
}

/// Grid search over the simplex with the given step on one window.
pub fn grid_search(records: &[TweetRecord], truth: &GroundTruth, step: f64, opts: &RunOptions) -> Result<GridResult> {
    let weights = enumerate_simplex(step)?;
    let setup = ProtomemeSetup::new(records, opts)?;
    let index = truth_index_for(records, truth)?;
    grid_search_with(&setup, &index, &weights, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_counts() {
        assert_eq!(enumerate_simplex(0.1).unwrap().len(), 286);
        assert_eq!(enumerate_simplex(0.5).unwrap().len(), 10);
        assert_eq!(enumerate_simplex(0.25).unwrap().len(), 35);
        let units = enumerate_simplex(1.0).unwrap();
        assert_eq!(units.len(), 4);
        assert_eq!(units[0].as_tcud(), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn simplex_sums_to_one() {
        for w in enumerate_simplex(0.1).unwrap() {
            let s: f64 = w.as_tcud().iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            assert!(w.as_tcud().iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn bad_steps_rejected() {
        assert!(enumerate_simplex(0.0).is_err());
        assert!(enumerate_simplex(0.3).is_err());
        assert!(enumerate_simplex(1.5).is_err());
    }

    #[test]
    fn single_topic_truth_ties_pick_first() {
        let records: Vec<TweetRecord> = ["#a x y", "#a y z", "#b q r"]
            .iter()
            .enumerate()
            .map(|(i, t)| TweetRecord::from_text(i.to_string(), format!("u{i}"), *t, 0))
            .collect();
        let truth = GroundTruth::from_assignments((0..3).map(|i| (i.to_string(), vec!["T"])));
        let result = grid_search(&records, &truth, 0.5, &RunOptions::default()).unwrap();
        assert_eq!(result.rows.len(), 10);
        assert!(result.rows.iter().all(|r| r.best_lfk_nmi == result.rows[0].best_lfk_nmi));
        assert_eq!(result.best, 0);
    }
}
