//! Discriminative shapelet discovery from one-vs-all profile differences.
//!
//! For each class the own-class self-join and the join against every
//! other class are computed over the concatenated class series. A large
//! `other - own` value marks a subsequence that recurs inside its class
//! but has no close match elsewhere; the top `k` non-overlapping peaks
//! become that class's shapelets.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::matrix_profile::{cross_class_profiles_with, ConcatenatedClassSeries, MatrixProfile, Metric};

/// Subsequence length used when none is given.
pub const DEFAULT_WINDOW: usize = 15;
/// Candidates kept per class when none is given.
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Shapelet {
    pub values: Vec<f64>,
    pub class_label: usize,
    pub dataset_name: String,
    /// Start offset in the concatenated class series.
    pub position: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeletSet {
    pub dataset_name: String,
    pub window: usize,
    /// Per class, ordered by descending score.
    pub per_class: BTreeMap<usize, Vec<Shapelet>>,
}

impl ShapeletSet {
    /// All shapelets, classes in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = &Shapelet> {
        self.per_class.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.per_class.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ShapeletSetJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ShapeletSetJson = serde_json::from_str(text)?;
        raw.try_into()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ShapeletSetJson {
    dataset: String,
    window: usize,
    classes: Vec<ClassJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassJson {
    label: usize,
    shapelets: Vec<ShapeletJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ShapeletJson {
    position: usize,
    score: f64,
    values: Vec<f64>,
}

impl From<&ShapeletSet> for ShapeletSetJson {
    fn from(set: &ShapeletSet) -> Self {
        ShapeletSetJson {
            dataset: set.dataset_name.clone(),
            window: set.window,
            classes: set
                .per_class
                .iter()
                .map(|(&label, list)| ClassJson {
                    label,
                    shapelets: list
                        .iter()
                        .map(|s| ShapeletJson {
                            position: s.position,
                            score: s.score,
                            values: s.values.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ShapeletSetJson> for ShapeletSet {
    type Error = Error;

    fn try_from(raw: ShapeletSetJson) -> Result<Self> {
        let mut per_class = BTreeMap::new();
        for class in raw.classes {
            let list = class
                .shapelets
                .into_iter()
                .map(|s| {
                    if s.values.len() != raw.window {
                        return Err(Error::WindowMismatch {
                            left: raw.window,
                            right: s.values.len(),
                        });
                    }
                    Ok(Shapelet {
                        values: s.values,
                        class_label: class.label,
                        dataset_name: raw.dataset.clone(),
                        position: s.position,
                        score: s.score,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            per_class.insert(class.label, list);
        }
        Ok(ShapeletSet {
            dataset_name: raw.dataset,
            window: raw.window,
            per_class,
        })
    }
}

/// `other - own` at positions valid in both profiles, `-inf` elsewhere.
pub fn difference_profile(other: &MatrixProfile, own: &MatrixProfile) -> Result<Vec<f64>> {
    if other.window != own.window {
        return Err(Error::WindowMismatch {
            left: other.window,
            right: own.window,
        });
    }
    if other.len() != own.len() {
        return Err(Error::InvalidArgument(format!(
            "profiles cover different queries ({} vs {} positions)",
            other.len(),
            own.len()
        )));
    }
    Ok((0..own.len())
        .map(|r| {
            if other.mask[r] || own.mask[r] {
                f64::NEG_INFINITY
            } else {
                other.distances[r] - own.distances[r]
            }
        })
        .collect())
}

/// Greedy top-`k` peak picking: descending score, ties to the smaller
/// position, skipping anything closer than `window` to an earlier pick.
/// Non-finite scores are never selected.
pub fn select_top_k(scores: &[f64], window: usize, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len())
        .filter(|&p| scores[p].is_finite())
        .collect();
    order.sort_by(|&a, &b| match scores[b].total_cmp(&scores[a]) {
        Ordering::Equal => a.cmp(&b),
        other => other,
    });
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    for p in order {
        if picked.len() == k {
            break;
        }
        if picked.iter().all(|&q| p.abs_diff(q) >= window) {
            picked.push(p);
        }
    }
    picked
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscoveryConfig {
    pub window: usize,
    pub k: usize,
    pub metric: Metric,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            window: DEFAULT_WINDOW,
            k: DEFAULT_TOP_K,
            metric: Metric::Euclidean,
        }
    }
}

/// Top-`k` shapelets of length `window` per class, raw Euclidean distance.
pub fn discover(ds: &LabeledDataset, window: usize, k: usize) -> Result<ShapeletSet> {
    discover_with(
        ds,
        &DiscoveryConfig {
            window,
            k,
            metric: Metric::Euclidean,
        },
    )
}

pub fn discover_with(ds: &LabeledDataset, config: &DiscoveryConfig) -> Result<ShapeletSet> {
    let DiscoveryConfig { window, k, metric } = *config;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if window == 0 || window > ds.length() {
        return Err(Error::InvalidArgument(format!(
            "window {window} does not fit series of length {}",
            ds.length()
        )));
    }
    if ds.n_classes() < 2 {
        return Err(Error::TooFewClasses(ds.n_classes()));
    }
    let per_class = ConcatenatedClassSeries::per_class(ds, window)?;
    for (class, series) in &per_class {
        if series.subsequences().is_empty() {
            return Err(Error::NoValidSubsequences {
                window,
                context: format!("{} class {class}", ds.name()),
            });
        }
    }

    let per_class_shapelets = ds
        .classes()
        .par_iter()
        .map(|&class| {
            let (own, other) = cross_class_profiles_with(&per_class, class, metric)?;
            let diff = difference_profile(&other, &own)?;
            let picks = select_top_k(&diff, window, k);
            if picks.is_empty() {
                return Err(Error::NoValidSubsequences {
                    window,
                    context: format!(
                        "{} class {class} has no subsequence with a non-trivial in-class match",
                        ds.name()
                    ),
                });
            }
            let series = &per_class[&class];
            let list = picks
                .into_iter()
                .map(|p| Shapelet {
                    values: series.subsequence(p).to_vec(),
                    class_label: class,
                    dataset_name: ds.name().to_string(),
                    position: p,
                    score: diff[p],
                })
                .collect();
            Ok((class, list))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;

    Ok(ShapeletSet {
        dataset_name: ds.name().to_string(),
        window,
        per_class: per_class_shapelets,
    })
}
