use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{resample_dataset, LabeledDataset};
use crate::distance::{
    class_prototypes, prototype_distance, shapelet_distance, DbaConfig, DbaPrototype, Measure,
};
use crate::error::{Error, Result};
use crate::shapelet::{discover_with, DiscoveryConfig, ShapeletSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankConfig {
    pub measure: Measure,
    pub discovery: DiscoveryConfig,
    pub dba: DbaConfig,
}

impl RankConfig {
    pub fn new(measure: Measure, window: usize, k: usize) -> Self {
        RankConfig {
            measure,
            discovery: DiscoveryConfig {
                window,
                k,
                ..DiscoveryConfig::default()
            },
            dba: DbaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub source: String,
    pub distance: f64,
}

/// A candidate that could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankError {
    pub source: String,
    pub reason: String,
}

/// Candidates ordered by ascending distance to the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRanking {
    pub target: String,
    pub measure: Measure,
    pub window: usize,
    pub k: usize,
    pub entries: Vec<RankEntry>,
    pub errors: Vec<RankError>,
}

impl SourceRanking {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// `rank,source,distance` rows; failed candidates are not listed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,source,distance\n");
        for (i, e) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, e.source, e.distance);
        }
        out
    }

    /// Names of the first `n` entries.
    pub fn top(&self, n: usize) -> Vec<&str> {
        self.entries.iter().take(n).map(|e| e.source.as_str()).collect()
    }
}

enum TargetModel {
    Shapelets(ShapeletSet),
    Prototypes(Vec<DbaPrototype>),
}

/// Ranks candidates by shapelet distance with the given window and `k`.
pub fn rank_sources(
    target: &LabeledDataset,
    candidates: &[LabeledDataset],
    measure: Measure,
    window: usize,
    k: usize,
) -> Result<SourceRanking> {
    rank_sources_with(target, candidates, &RankConfig::new(measure, window, k))
}

/// Scores every candidate against the target. A candidate sharing the
/// target's name is skipped; one that fails (too short for the window,
/// a single class, ...) is reported under `errors` instead of ranked.
pub fn rank_sources_with(
    target: &LabeledDataset,
    candidates: &[LabeledDataset],
    config: &RankConfig,
) -> Result<SourceRanking> {
    let pool: Vec<&LabeledDataset> = candidates
        .iter()
        .filter(|c| c.name() != target.name())
        .collect();
    if pool.is_empty() {
        return Err(Error::InvalidArgument("no candidate sources".into()));
    }
    let mut seen = BTreeSet::new();
    for c in &pool {
        if !seen.insert(c.name()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate candidate name {:?}",
                c.name()
            )));
        }
    }

    let model = if config.measure.uses_shapelets() {
        TargetModel::Shapelets(discover_with(target, &config.discovery)?)
    } else {
        TargetModel::Prototypes(class_prototypes(target, &config.dba)?)
    };

    let scored: Vec<(String, Result<f64>)> = pool
        .par_iter()
        .map(|cand| {
            let value = match &model {
                TargetModel::Shapelets(tgt) => discover_with(cand, &config.discovery)
                    .and_then(|src| shapelet_distance(config.measure, &src, tgt))
                    .map(|d| d.value),
                TargetModel::Prototypes(tgt) => resample_dataset(cand, target.length())
                    .and_then(|src| class_prototypes(&src, &config.dba))
                    .and_then(|src| prototype_distance(&src, tgt, &config.dba.dtw)),
            };
            (cand.name().to_string(), value)
        })
        .collect();

    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (source, value) in scored {
        match value {
            Ok(distance) => entries.push(RankEntry { source, distance }),
            Err(e) => errors.push(RankError {
                source,
                reason: e.to_string(),
            }),
        }
    }
    entries.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.source.cmp(&b.source))
    });
    errors.sort_by(|a, b| a.source.cmp(&b.source));

    Ok(SourceRanking {
        target: target.name().to_string(),
        measure: config.measure,
        window: config.discovery.window,
        k: config.discovery.k,
        entries,
        errors,
    })
}
