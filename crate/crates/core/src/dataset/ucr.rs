use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{format_label, linear_interpolate, LabeledDataset, LabeledSeries};
use crate::error::{Error, Result};

/// Column separator of the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Tab,
    Whitespace,
}

/// Loads a UCR-style tab-separated file. The dataset is named after the
/// file stem with any `_TRAIN`/`_TEST` suffix removed.
pub fn load_ucr_tsv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    load_ucr(path, Delimiter::Tab)
}

pub fn load_ucr(path: impl AsRef<Path>, delimiter: Delimiter) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, &dataset_name(path), path, delimiter)
}

/// Parses UCR text already in memory.
pub fn load_ucr_str(text: &str, name: &str, delimiter: Delimiter) -> Result<LabeledDataset> {
    parse(text, name, Path::new(name), delimiter)
}

fn dataset_name(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    for suffix in ["_TRAIN", "_TEST"] {
        if let Some(base) = stem.strip_suffix(suffix) {
            return base.to_string();
        }
    }
    stem
}

struct RawRow {
    label: f64,
    values: Vec<f64>,
}

fn parse(text: &str, name: &str, path: &Path, delimiter: Delimiter) -> Result<LabeledDataset> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        reason,
    };

    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens: Vec<&str> = match delimiter {
            Delimiter::Tab => line.split('\t').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        };
        while tokens.last().is_some_and(|t| t.is_empty()) {
            tokens.pop();
        }
        if tokens.len() < 2 {
            return Err(parse_err(
                lineno,
                format!("expected a label and at least one value, found {} field(s)", tokens.len()),
            ));
        }
        let label: f64 = tokens[0]
            .parse()
            .ok()
            .filter(|l: &f64| l.is_finite())
            .ok_or_else(|| parse_err(lineno, format!("invalid label {:?}", tokens[0])))?;
        let values = tokens[1..]
            .iter()
            .map(|t| {
                if t.is_empty() {
                    return Ok(f64::NAN);
                }
                t.parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("invalid value {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let values = repair_missing(&values)
            .ok_or_else(|| parse_err(lineno, "row has no finite values".to_string()))?;
        rows.push(RawRow { label, values });
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(format!("{}: no rows", path.display())));
    }

    let length = rows.iter().map(|r| r.values.len()).max().unwrap_or(0);
    let mut raw_labels: Vec<f64> = rows.iter().map(|r| r.label).collect();
    raw_labels.sort_by(f64::total_cmp);
    raw_labels.dedup();

    let series = rows
        .into_iter()
        .map(|r| {
            let label = raw_labels
                .binary_search_by(|probe| probe.total_cmp(&r.label))
                .expect("label collected above");
            let values = if r.values.len() == length {
                r.values
            } else {
                linear_interpolate(&r.values, length)
            };
            LabeledSeries { values, label }
        })
        .collect();
    LabeledDataset::new(name, series, raw_labels)
}

/// Fills non-finite entries: linear interpolation between the nearest
/// finite neighbours, edge values carried outward at the boundaries.
/// Returns `None` when nothing finite is left to anchor on.
fn repair_missing(values: &[f64]) -> Option<Vec<f64>> {
    let known: Vec<usize> = (0..values.len())
        .filter(|&i| values[i].is_finite())
        .collect();
    let (&first, &last) = (known.first()?, known.last()?);
    if known.len() == values.len() {
        return Some(values.to_vec());
    }
    let mut out = values.to_vec();
    out[..first].fill(values[first]);
    out[last + 1..].fill(values[last]);
    for pair in known.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a > 1 {
            let (va, vb) = (values[a], values[b]);
            for (i, slot) in out.iter_mut().enumerate().take(b).skip(a + 1) {
                let t = (i - a) as f64 / (b - a) as f64;
                *slot = va + (vb - va) * t;
            }
        }
    }
    Some(out)
}

/// Serializes with raw labels, tab-separated, shortest round-trip floats.
pub fn to_ucr_string(ds: &LabeledDataset) -> String {
    let mut out = String::new();
    for s in ds.series() {
        out.push_str(&format_label(ds.raw_labels()[s.label]));
        for v in &s.values {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_ucr_tsv(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_ucr_string(ds)).map_err(|e| Error::io(path, e))
}

/// Writes the JSON metadata sidecar for `ds`.
pub fn write_metadata(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut json = serde_json::to_string_pretty(&ds.metadata())?;
    json.push('\n');
    fs::write(path, json).map_err(|e| Error::io(path, e))
}
