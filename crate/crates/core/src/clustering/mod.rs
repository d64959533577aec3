//! Clustering of protomemes (or messages) from a similarity matrix.

pub mod cover;
pub mod hierarchical;
pub mod kmeans;

pub use cover::{assign_incoming, cover_from_partition, ClusterCover, LiveIndex};
pub use hierarchical::{cut, cut_sweep, cut_to_count, hierarchical_cluster, Dendrogram, Merge, Partition, SweepEntry};
pub use kmeans::{kmeans, spherical_kmeans, KMeansResult, KMeansRun};
