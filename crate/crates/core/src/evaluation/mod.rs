//! Scoring predicted clusters against overlapping ground truth.

pub mod lfk;
pub mod nmi;
pub mod report;
pub mod sweep;
pub mod truth;

pub use lfk::{lfk_from_counts, lfk_nmi, lfk_nmi_covers, lfk_nmi_members, TruthIndex, LFK_VARIANT};
pub use nmi::{confusion, nmi, ConfusionMatrix};
pub use report::{evaluate, MetricReport};
pub use sweep::{score_partition, score_sweep, ScoredCut, Sweep};
pub use truth::{load_ground_truth, load_ground_truth_file, overlap_ratio, GroundTruth, Topic};
