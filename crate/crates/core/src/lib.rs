//! Meme clustering for short social-media messages.
//!
//! Messages are pre-clustered into *protomemes* (all messages sharing a
//! hashtag, mention, URL, or normalized phrase), protomeme pairs are scored
//! with four similarity measures, and the combined similarity drives
//! average-linkage agglomerative clustering. The resulting clusters are
//! projected back onto messages, which can belong to several memes at once,
//! and scored against overlapping ground truth with NMI and LFK-NMI.
//!
//! The pipeline, bottom-up:
//!
//! * [`ingest`] parses JSON Lines exports, deduplicates, and windows records.
//! * [`protomeme`] extracts entities and builds protomemes with TF-IDF content.
//! * [`similarity`] computes the pairwise measures and their combinations.
//! * [`clustering`] builds dendrograms, cuts them, and runs spherical K-means.
//! * [`evaluation`] implements NMI, LFK-NMI, and ground-truth handling.
//! * [`experiment`] drives baselines, simplex grid search, and cross-validation.
//! * [`cli`] wires everything into reproducible file-based commands.
//!
//! Data-parallel kernels (pairwise similarities, grid-search configurations,
//! K-means restarts) run on rayon when the `parallel` feature is enabled and
//! fall back to plain iterators otherwise. Results are identical either way.

pub mod cli;
pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod experiment;
pub mod ingest;
pub mod kv;
pub mod protomeme;
pub mod similarity;

pub use error::{Error, Result};
pub use exec::Execution;
