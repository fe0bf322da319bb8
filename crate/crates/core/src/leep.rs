//! LEEP transferability score from a source model's predictions on the
//! target samples.

use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-6;
const LOG_FLOOR: f64 = 1e-300;

/// Source-class probabilities for each target sample, with the sample's
/// target label.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    probs: Vec<f64>,
    n_samples: usize,
    n_source_classes: usize,
    target_labels: Vec<usize>,
    n_target_classes: usize,
}

impl PredictionMatrix {
    pub fn new(rows: Vec<Vec<f64>>, target_labels: Vec<usize>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidPredictions(msg));
        if rows.is_empty() {
            return bad("no samples".into());
        }
        if rows.len() != target_labels.len() {
            return bad(format!(
                "{} rows but {} labels",
                rows.len(),
                target_labels.len()
            ));
        }
        let n_source_classes = rows[0].len();
        if n_source_classes == 0 {
            return bad("no source classes".into());
        }
        let mut probs = Vec::with_capacity(rows.len() * n_source_classes);
        for (n, row) in rows.iter().enumerate() {
            if row.len() != n_source_classes {
                return bad(format!(
                    "row {n} has {} entries, expected {n_source_classes}",
                    row.len()
                ));
            }
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return bad(format!("row {n} has entry {p} outside [0, 1]"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return bad(format!("row {n} sums to {sum}"));
            }
            probs.extend_from_slice(row);
        }
        let n_target_classes = target_labels.iter().max().map_or(0, |m| m + 1);
        Ok(PredictionMatrix {
            probs,
            n_samples: rows.len(),
            n_source_classes,
            target_labels,
            n_target_classes,
        })
    }

    /// Reads `label,p0,p1,...` CSV with a header row.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("label") || headers.len() < 2 {
            return Err(Error::InvalidPredictions(
                "header must be label,p0,p1,...".into(),
            ));
        }
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let field_err = |f: &str| {
                Error::InvalidPredictions(format!("row {}: cannot parse {f:?}", i + 1))
            };
            let label = record.get(0).unwrap_or_default();
            labels.push(label.parse::<usize>().map_err(|_| field_err(label))?);
            rows.push(
                record
                    .iter()
                    .skip(1)
                    .map(|f| f.parse::<f64>().map_err(|_| field_err(f)))
                    .collect::<Result<Vec<f64>>>()?,
            );
        }
        Self::new(rows, labels)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(file)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_source_classes(&self) -> usize {
        self.n_source_classes
    }

    pub fn n_target_classes(&self) -> usize {
        self.n_target_classes
    }

    pub fn target_labels(&self) -> &[usize] {
        &self.target_labels
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.probs[n * self.n_source_classes..(n + 1) * self.n_source_classes]
    }
}

/// Empirical joint `P(y, c)`, marginal `P(c)` and conditional `P(y | c)`;
/// matrices are indexed `[y][c]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    pub joint: Vec<Vec<f64>>,
    pub marginal: Vec<f64>,
    pub conditional: Vec<Vec<f64>>,
    /// Source classes that received no probability mass; their
    /// conditional falls back to uniform.
    pub empty_source_classes: Vec<usize>,
}

pub fn empirical_conditional(preds: &PredictionMatrix) -> EmpiricalDistribution {
    let (k, c_count) = (preds.n_target_classes, preds.n_source_classes);
    let n = preds.n_samples as f64;
    let mut joint = vec![vec![0.0; c_count]; k];
    let mut marginal = vec![0.0; c_count];
    for s in 0..preds.n_samples {
        let y = preds.target_labels[s];
        for (c, &p) in preds.row(s).iter().enumerate() {
            joint[y][c] += p;
            marginal[c] += p;
        }
    }
    joint.iter_mut().flatten().for_each(|v| *v /= n);
    marginal.iter_mut().for_each(|v| *v /= n);

    let mut empty_source_classes = Vec::new();
    let mut conditional = vec![vec![0.0; c_count]; k];
    for c in 0..c_count {
        if marginal[c] > 0.0 {
            for y in 0..k {
                conditional[y][c] = joint[y][c] / marginal[c];
            }
        } else {
            empty_source_classes.push(c);
            for row in conditional.iter_mut() {
                row[c] = 1.0 / k as f64;
            }
        }
    }
    EmpiricalDistribution {
        joint,
        marginal,
        conditional,
        empty_source_classes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeepScore {
    pub value: f64,
    pub joint: Vec<Vec<f64>>,
    pub conditional: Vec<Vec<f64>>,
    pub empty_source_classes: Vec<usize>,
}

/// Mean log-likelihood of each sample's own label under the mixture
/// `sum_c P(y | c) f(x)_c`.
pub fn leep(preds: &PredictionMatrix) -> LeepScore {
    let dist = empirical_conditional(preds);
    let total: f64 = (0..preds.n_samples)
        .map(|s| {
            let y = preds.target_labels[s];
            let mix: f64 = preds
                .row(s)
                .iter()
                .zip(&dist.conditional[y])
                .map(|(p, cond)| p * cond)
                .sum();
            mix.clamp(LOG_FLOOR, 1.0).ln()
        })
        .sum();
    LeepScore {
        value: total / preds.n_samples as f64,
        joint: dist.joint,
        conditional: dist.conditional,
        empty_source_classes: dist.empty_source_classes,
    }
}

/// Summary written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeepReport {
    pub value: f64,
    pub n_samples: usize,
    pub n_source_classes: usize,
}

impl LeepReport {
    pub fn new(score: &LeepScore, preds: &PredictionMatrix) -> Self {
        LeepReport {
            value: score.value,
            n_samples: preds.n_samples,
            n_source_classes: preds.n_source_classes,
        }
    }
}
