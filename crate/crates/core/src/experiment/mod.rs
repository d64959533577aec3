//! Experiment drivers: baselines, protomeme configurations, algorithm
//! comparison, simplex grid search, and cross-validation.

pub mod config;
pub mod configs;
pub mod crossval;
pub mod curve;
pub mod followers;
pub mod grid;
pub mod synth;

pub use config::{ExperimentConfig, Mode};
pub use configs::{
    baseline_followers_matrix, baseline_matrix, compare_algorithms, run_baseline, run_baseline_followers,
    run_protomeme_config, truth_index_for, tweet_document, tweet_tfidf_vectors, AlgorithmComparison,
    ProtomemeSetup, RunOptions,
};
pub use crossval::{assign_folds, cross_validate, select_weights, CvConfig, CvResult, FoldResult};
pub use curve::{average_curves, mean_stderr, Curve, MeanPoint};
pub use followers::FollowerGraph;
pub use grid::{enumerate_simplex, grid_search, grid_search_with, GridResult, GridRow};
pub use synth::{generate, SynthConfig, SynthCorpus};
