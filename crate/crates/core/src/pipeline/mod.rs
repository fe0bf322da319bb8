//! Source ranking and super dataset assembly.

mod rank;
mod super_dataset;

pub use rank::{rank_sources, rank_sources_with, RankConfig, RankEntry, RankError, SourceRanking};
pub use super_dataset::{
    build_super_dataset, build_super_dataset_with, largest_remainder, OversampleMode,
    ResampleRecord, SourceEntry, SuperConfig, SuperDataset, SuperDatasetManifest,
};

/// Number of top-ranked sources merged when the caller does not say.
pub const DEFAULT_NUM_SOURCES: usize = 14;
