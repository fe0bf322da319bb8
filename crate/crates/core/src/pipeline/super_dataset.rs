use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{resample_dataset, to_ucr_string, LabeledDataset, LabeledSeries};
use crate::error::{Error, Result};

/// How extra copies are picked within a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OversampleMode {
    /// Members in dataset order: 0, 1, 2, ... wrapping around.
    #[default]
    Cycle,
    /// Members in a seeded random order, then cycled.
    Seeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SuperConfig {
    pub seed: u64,
    pub mode: OversampleMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub name: String,
    pub original_size: usize,
    pub balanced_size: usize,
    pub class_count: usize,
    pub label_offset: usize,
    pub original_class_counts: Vec<usize>,
    pub balanced_class_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResampleRecord {
    pub source: String,
    pub original_length: usize,
    pub target_length: usize,
    pub sigma: f64,
}

/// Describes a merged multi-source training set. Global label
/// `label_offset + local_class` identifies a (source, class) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperDatasetManifest {
    pub target: String,
    pub target_length: usize,
    pub sources: Vec<SourceEntry>,
    pub total_classes: usize,
    pub total_series: usize,
    pub resample_params: Vec<ResampleRecord>,
    pub seed: u64,
    pub oversampling: OversampleMode,
}

impl SuperDatasetManifest {
    /// Source index and local class id of a global label.
    pub fn decode(&self, global: usize) -> Option<(usize, usize)> {
        self.sources
            .iter()
            .enumerate()
            .find(|(_, s)| (s.label_offset..s.label_offset + s.class_count).contains(&global))
            .map(|(i, s)| (i, global - s.label_offset))
    }

    pub fn encode(&self, source: usize, class: usize) -> Option<usize> {
        let s = self.sources.get(source)?;
        (class < s.class_count).then_some(s.label_offset + class)
    }

    /// Checks the manifest's internal consistency.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDataset(format!("manifest: {m}")));
        if self.sources.is_empty() {
            return bad("no sources".into());
        }
        if self.resample_params.len() != self.sources.len() {
            return bad("resample_params does not match sources".into());
        }
        let quota = self.sources[0].balanced_size;
        let mut offset = 0;
        for (s, r) in self.sources.iter().zip(&self.resample_params) {
            if s.label_offset != offset {
                return bad(format!("{}: label_offset {} != {offset}", s.name, s.label_offset));
            }
            offset += s.class_count;
            if s.balanced_size != quota {
                return bad(format!("{}: balanced_size {} != {quota}", s.name, s.balanced_size));
            }
            if s.original_class_counts.len() != s.class_count
                || s.balanced_class_counts.len() != s.class_count
            {
                return bad(format!("{}: class count vectors", s.name));
            }
            if s.original_class_counts.iter().sum::<usize>() != s.original_size
                || s.balanced_class_counts.iter().sum::<usize>() != s.balanced_size
            {
                return bad(format!("{}: class counts do not add up", s.name));
            }
            if r.source != s.name || r.target_length != self.target_length {
                return bad(format!("{}: resample record", s.name));
            }
        }
        if offset != self.total_classes {
            return bad(format!("total_classes {} != {offset}", self.total_classes));
        }
        if quota * self.sources.len() != self.total_series {
            return bad(format!("total_series {}", self.total_series));
        }
        Ok(())
    }
}

/// A manifest together with the merged series.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperDataset {
    pub manifest: SuperDatasetManifest,
    pub dataset: LabeledDataset,
}

impl SuperDataset {
    pub fn manifest_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.manifest)?;
        s.push('\n');
        Ok(s)
    }

    /// Merged series as UCR TSV with global labels.
    pub fn to_tsv(&self) -> String {
        to_ucr_string(&self.dataset)
    }

    /// Writes `manifest.json` and `super.tsv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = dir.join("manifest.json");
        fs::write(&manifest, self.manifest_json()?).map_err(|e| Error::io(&manifest, e))?;
        let tsv = dir.join("super.tsv");
        fs::write(&tsv, self.to_tsv()).map_err(|e| Error::io(&tsv, e))
    }
}

/// Splits `quota` across classes in proportion to `counts`, rounding by
/// largest remainder (ties to the lower class id).
pub fn largest_remainder(counts: &[usize], quota: usize) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0; counts.len()];
    }
    let mut alloc: Vec<usize> = counts.iter().map(|&c| quota * c / total).collect();
    let mut left = quota - alloc.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = ((quota * counts[a]) % total, (quota * counts[b]) % total);
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for c in order {
        if left == 0 {
            break;
        }
        alloc[c] += 1;
        left -= 1;
    }
    alloc
}

/// Deterministic merge with index-cycling oversampling.
pub fn build_super_dataset(
    target: &LabeledDataset,
    selected: &[LabeledDataset],
    seed: u64,
) -> Result<SuperDataset> {
    build_super_dataset_with(
        target,
        selected,
        &SuperConfig {
            seed,
            mode: OversampleMode::Cycle,
        },
    )
}

/// Resamples every source to the target length, oversamples each to the
/// largest source's size keeping its class ratios, and concatenates the
/// label spaces in selection order.
pub fn build_super_dataset_with(
    target: &LabeledDataset,
    selected: &[LabeledDataset],
    config: &SuperConfig,
) -> Result<SuperDataset> {
    if selected.is_empty() {
        return Err(Error::InvalidArgument("no sources selected".into()));
    }
    let mut names = BTreeSet::new();
    for s in selected {
        if !names.insert(s.name()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate source name {:?}",
                s.name()
            )));
        }
    }
    let quota = selected.iter().map(LabeledDataset::len).max().unwrap_or(0);
    let target_length = target.length();

    let mut sources = Vec::with_capacity(selected.len());
    let mut resample_params = Vec::with_capacity(selected.len());
    let mut merged = Vec::with_capacity(quota * selected.len());
    let mut offset = 0;
    for (idx, src) in selected.iter().enumerate() {
        let resized = resample_dataset(src, target_length)?;
        let spec = *resized.resample_spec().expect("set by resample_dataset");
        let original_counts = resized.class_counts();
        let balanced_counts = largest_remainder(&original_counts, quota);

        merged.extend(resized.series().iter().map(|s| LabeledSeries {
            values: s.values.clone(),
            label: offset + s.label,
        }));
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(idx as u64));
        for (class, (&have, &want)) in original_counts.iter().zip(&balanced_counts).enumerate() {
            let mut members: Vec<&LabeledSeries> = resized.class_members(class).collect();
            if config.mode == OversampleMode::Seeded {
                members.shuffle(&mut rng);
            }
            merged.extend((0..want - have).map(|i| LabeledSeries {
                values: members[i % members.len()].values.clone(),
                label: offset + class,
            }));
        }

        sources.push(SourceEntry {
            name: src.name().to_string(),
            original_size: src.len(),
            balanced_size: quota,
            class_count: src.n_classes(),
            label_offset: offset,
            original_class_counts: original_counts,
            balanced_class_counts: balanced_counts,
        });
        resample_params.push(ResampleRecord {
            source: src.name().to_string(),
            original_length: src.length(),
            target_length: spec.target_length,
            sigma: spec.smoothing_sigma,
        });
        offset += src.n_classes();
    }

    let manifest = SuperDatasetManifest {
        target: target.name().to_string(),
        target_length,
        total_classes: offset,
        total_series: merged.len(),
        sources,
        resample_params,
        seed: config.seed,
        oversampling: config.mode,
    };
    let dataset = LabeledDataset::new(
        format!("{}_super", target.name()),
        merged,
        (0..offset).map(|c| c as f64).collect(),
    )?;
    Ok(SuperDataset { manifest, dataset })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(name: &str, counts: &[usize], length: usize) -> LabeledDataset {
        let mut series = Vec::new();
        for (class, &n) in counts.iter().enumerate() {
            for i in 0..n {
                series.push(LabeledSeries {
                    values: (0..length).map(|t| (class * 100 + i) as f64 + t as f64 * 0.5).collect(),
                    label: class,
                });
            }
        }
        LabeledDataset::new(name, series, (0..counts.len()).map(|c| c as f64 + 1.0).collect())
            .unwrap()
    }

    #[test]
    fn largest_remainder_cases() {
        assert_eq!(largest_remainder(&[20, 10], 60), vec![40, 20]);
        assert_eq!(largest_remainder(&[1, 1, 1], 4), vec![2, 1, 1]);
        assert_eq!(largest_remainder(&[3, 2], 5), vec![3, 2]);
        assert_eq!(largest_remainder(&[2, 3, 5], 7), vec![1, 2, 4]);
    }

    #[test]
    fn identity_single_source() {
        let t = ds("t", &[3, 2], 8);
        let src = ds("s", &[2, 2], 8);
        let out = build_super_dataset(&t, std::slice::from_ref(&src), 0).unwrap();
        assert_eq!(out.manifest.sources[0].label_offset, 0);
        assert_eq!(out.manifest.total_series, 4);
        for (a, b) in out.dataset.series().iter().zip(src.series()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn quota_is_max_size() {
        let t = ds("t", &[3, 2], 12);
        let out = build_super_dataset(&t, &[ds("a", &[20, 10], 30), ds("b", &[30, 30], 9)], 0).unwrap();
        let m = &out.manifest;
        assert_eq!(m.sources[0].balanced_size, 60);
        assert_eq!(m.sources[1].balanced_size, 60);
        assert_eq!(m.total_series, 120);
        assert_eq!(m.sources[0].balanced_class_counts, vec![40, 20]);
        assert_eq!(m.sources[1].label_offset, 2);
        assert_eq!(m.total_classes, 4);
        assert!(out.dataset.series().iter().all(|s| s.values.len() == 12));
        m.validate().unwrap();
        assert_eq!(m.decode(3), Some((1, 1)));
        assert_eq!(m.encode(1, 1), Some(3));
        assert_eq!(m.decode(4), None);
    }

    #[test]
    fn cycling_copies_in_order() {
        let t = ds("t", &[1, 1], 4);
        let a = ds("a", &[2, 1], 4);
        let b = ds("b", &[5, 2], 4);
        let out = build_super_dataset(&t, &[a.clone(), b], 0).unwrap();
        // a: quota 7 -> {5, 2}; extra copies of class 0 cycle members 0, 1, 0
        let merged: Vec<_> = out.dataset.series()[..7].to_vec();
        let c0: Vec<&LabeledSeries> = a.class_members(0).collect();
        assert_eq!(merged[3].values, c0[0].values);
        assert_eq!(merged[4].values, c0[1].values);
        assert_eq!(merged[5].values, c0[0].values);
    }

    #[test]
    fn seeded_mode_is_reproducible() {
        let t = ds("t", &[1, 1], 4);
        let srcs = [ds("a", &[4, 1], 4), ds("b", &[9, 6], 4)];
        let cfg = SuperConfig {
            seed: 7,
            mode: OversampleMode::Seeded,
        };
        let x = build_super_dataset_with(&t, &srcs, &cfg).unwrap();
        let y = build_super_dataset_with(&t, &srcs, &cfg).unwrap();
        assert_eq!(x.to_tsv(), y.to_tsv());
        assert_eq!(x.manifest.oversampling, OversampleMode::Seeded);
    }

    #[test]
    fn errors() {
        let t = ds("t", &[1, 1], 4);
        assert!(build_super_dataset(&t, &[], 0).is_err());
        let a = ds("a", &[1, 1], 4);
        assert!(build_super_dataset(&t, &[a.clone(), a], 0).is_err());
    }

    #[test]
    fn manifest_json_round_trip() {
        let t = ds("t", &[2, 2], 6);
        let out = build_super_dataset(&t, &[ds("a", &[3, 1], 10)], 3).unwrap();
        let json = out.manifest_json().unwrap();
        let back: SuperDatasetManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(back, out.manifest);
    }
}
