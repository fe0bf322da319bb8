//! Dataset-to-dataset distances.

mod dtw;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shapelet::{Shapelet, ShapeletSet};

pub use dtw::{
    class_prototypes, dba, dba_dtw_distance, dba_dtw_distance_with, dtw, dtw_with, medoid,
    prototype_distance, DbaConfig, DbaPrototype, DtwConfig,
};

/// Which dataset distance to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    AvgShapelet,
    MinShapelet,
    DbaDtw,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::AvgShapelet, Measure::MinShapelet, Measure::DbaDtw];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::AvgShapelet => "avg_shapelet",
            Measure::MinShapelet => "min_shapelet",
            Measure::DbaDtw => "dba_dtw",
        }
    }

    pub fn uses_shapelets(self) -> bool {
        matches!(self, Measure::AvgShapelet | Measure::MinShapelet)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Transferability measures that need a trained source model and are not
/// computed by this crate.
pub const RESERVED_MEASURES: [&str; 4] = ["nce", "logme", "transrate", "h_score"];

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "avg_shapelet" | "average_shapelet" => Ok(Measure::AvgShapelet),
            "min_shapelet" | "minimum_shapelet" => Ok(Measure::MinShapelet),
            "dba_dtw" => Ok(Measure::DbaDtw),
            k if RESERVED_MEASURES.contains(&k) => Err(Error::InvalidArgument(format!(
                "measure {s:?} requires a trained source model and is not implemented"
            ))),
            _ => Err(Error::InvalidArgument(format!("unknown measure {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDistance {
    pub source: String,
    pub target: String,
    pub measure: Measure,
    pub value: f64,
}

/// L2 norm of the element-wise difference of two shapelets.
pub fn shapelet_l2(a: &Shapelet, b: &Shapelet) -> Result<f64> {
    if a.values.len() != b.values.len() {
        return Err(Error::WindowMismatch {
            left: a.values.len(),
            right: b.values.len(),
        });
    }
    Ok(l2(&a.values, &b.values))
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Every cross-set pair distance, all classes pooled.
fn pair_distances(src: &ShapeletSet, tgt: &ShapeletSet) -> Result<Vec<f64>> {
    if src.window != tgt.window {
        return Err(Error::WindowMismatch {
            left: src.window,
            right: tgt.window,
        });
    }
    for set in [src, tgt] {
        if set.is_empty() {
            return Err(Error::EmptyShapeletSet(set.dataset_name.clone()));
        }
    }
    let mut out = Vec::with_capacity(src.len() * tgt.len());
    for a in src.iter() {
        for b in tgt.iter() {
            out.push(shapelet_l2(a, b)?);
        }
    }
    Ok(out)
}

/// Mean distance over all source/target shapelet pairs.
pub fn avg_shapelet_distance(src: &ShapeletSet, tgt: &ShapeletSet) -> Result<DatasetDistance> {
    let mut pairs = pair_distances(src, tgt)?;
    // Summed in ascending order so swapping the arguments is exact.
    pairs.sort_by(f64::total_cmp);
    let value = pairs.iter().sum::<f64>() / pairs.len() as f64;
    Ok(DatasetDistance {
        source: src.dataset_name.clone(),
        target: tgt.dataset_name.clone(),
        measure: Measure::AvgShapelet,
        value,
    })
}

/// Distance between the closest source/target shapelet pair.
pub fn min_shapelet_distance(src: &ShapeletSet, tgt: &ShapeletSet) -> Result<DatasetDistance> {
    let value = pair_distances(src, tgt)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(DatasetDistance {
        source: src.dataset_name.clone(),
        target: tgt.dataset_name.clone(),
        measure: Measure::MinShapelet,
        value,
    })
}

/// Shapelet-based distance selected by `measure`.
pub fn shapelet_distance(
    measure: Measure,
    src: &ShapeletSet,
    tgt: &ShapeletSet,
) -> Result<DatasetDistance> {
    match measure {
        Measure::AvgShapelet => avg_shapelet_distance(src, tgt),
        Measure::MinShapelet => min_shapelet_distance(src, tgt),
        Measure::DbaDtw => Err(Error::InvalidArgument(
            "dba_dtw is not a shapelet measure".into(),
        )),
    }
}
