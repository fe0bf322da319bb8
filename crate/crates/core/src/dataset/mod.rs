//! Labeled univariate time series datasets.
//!
//! Datasets are loaded from the UCR archive's tab-separated layout
//! (`label<TAB>v1<TAB>v2...`). Raw labels are remapped to contiguous
//! class ids `0..K`; the raw values are kept so the dataset can be written
//! back out unchanged.

mod resample;
mod ucr;

use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use resample::{
    gaussian_smooth, linear_interpolate, resample, resample_dataset, sigma_for, ResampleSpec,
    SIGMA_EPSILON,
};
pub use ucr::{
    load_ucr, load_ucr_str, load_ucr_tsv, to_ucr_string, write_metadata, write_ucr_tsv, Delimiter,
};

/// One series and its class id.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub values: Vec<f64>,
    pub label: usize,
}

/// An immutable collection of equal-length labeled series.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    name: String,
    series: Vec<LabeledSeries>,
    length: usize,
    classes: Vec<usize>,
    raw_labels: Vec<f64>,
    resample: Option<ResampleSpec>,
}

impl LabeledDataset {
    /// Builds a dataset, checking every structural invariant.
    ///
    /// `raw_labels[id]` is the original label of class `id`; its length
    /// fixes the number of classes.
    pub fn new(
        name: impl Into<String>,
        series: Vec<LabeledSeries>,
        raw_labels: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        let first = series
            .first()
            .ok_or_else(|| Error::EmptyDataset(name.clone()))?;
        let length = first.values.len();
        if length == 0 {
            return Err(Error::InvalidDataset(format!("{name}: zero-length series")));
        }
        if raw_labels.is_empty() {
            return Err(Error::InvalidDataset(format!("{name}: no classes")));
        }
        let mut counts = vec![0usize; raw_labels.len()];
        for (i, s) in series.iter().enumerate() {
            if s.values.len() != length {
                return Err(Error::InvalidDataset(format!(
                    "{name}: series {i} has {} values, expected {length}",
                    s.values.len()
                )));
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "{name}: series {i} contains non-finite values"
                )));
            }
            match counts.get_mut(s.label) {
                Some(c) => *c += 1,
                None => {
                    return Err(Error::InvalidDataset(format!(
                        "{name}: series {i} has label {} outside 0..{}",
                        s.label,
                        raw_labels.len()
                    )))
                }
            }
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidDataset(format!(
                "{name}: class {empty} has zero rows"
            )));
        }
        Ok(LabeledDataset {
            name,
            series,
            length,
            classes: (0..raw_labels.len()).collect(),
            raw_labels,
            resample: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn series(&self) -> &[LabeledSeries] {
        &self.series
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Number of time steps per series.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Original label of each class id.
    pub fn raw_labels(&self) -> &[f64] {
        &self.raw_labels
    }

    pub fn resample_spec(&self) -> Option<&ResampleSpec> {
        self.resample.as_ref()
    }

    /// Number of series per class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for s in &self.series {
            counts[s.label] += 1;
        }
        counts
    }

    /// Series of one class, in dataset order.
    pub fn class_members(&self, class: usize) -> impl Iterator<Item = &LabeledSeries> {
        self.series.iter().filter(move |s| s.label == class)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub(crate) fn with_resample(mut self, spec: ResampleSpec) -> Self {
        self.resample = Some(spec);
        self
    }

    pub fn metadata(&self) -> DatasetMetadata {
        DatasetMetadata {
            name: self.name.clone(),
            length: self.length,
            classes: self.classes.clone(),
            raw_label_map: RawLabelMap(
                self.raw_labels
                    .iter()
                    .enumerate()
                    .map(|(id, &raw)| (format_label(raw), id))
                    .collect(),
            ),
            resample: self.resample,
        }
    }
}

/// Formats a raw label the way it is written to TSV: integral labels
/// without a fractional part.
pub fn format_label(raw: f64) -> String {
    if raw.fract() == 0.0 && raw.abs() < 1e15 {
        format!("{}", raw as i64)
    } else {
        format!("{raw}")
    }
}

/// JSON sidecar describing a dataset file.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetMetadata {
    pub name: String,
    pub length: usize,
    pub classes: Vec<usize>,
    pub raw_label_map: RawLabelMap,
    pub resample: Option<ResampleSpec>,
}

/// Raw label to class id, serialized as a JSON object in class-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLabelMap(pub Vec<(String, usize)>);

impl RawLabelMap {
    pub fn to_btree(&self) -> BTreeMap<String, usize> {
        self.0.iter().cloned().collect()
    }
}

impl Serialize for RawLabelMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (raw, id) in &self.0 {
            map.serialize_entry(raw, id)?;
        }
        map.end()
    }
}
