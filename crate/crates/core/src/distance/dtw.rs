//! Dynamic time warping and DTW barycenter averaging.

use rayon::prelude::*;
use serde::Serialize;

use super::{DatasetDistance, Measure};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DtwConfig {
    /// Sakoe-Chiba band half-width; `None` means unconstrained.
    pub window: Option<usize>,
}

impl DtwConfig {
    fn band(&self, n: usize, m: usize) -> usize {
        match self.window {
            Some(w) => w.max(n.abs_diff(m)),
            None => n.max(m),
        }
    }
}

/// DTW with squared local cost; returns the square root of the
/// accumulated cost so `dtw(a, a) == 0` and units match the signal.
pub fn dtw(a: &[f64], b: &[f64]) -> Result<f64> {
    dtw_with(a, b, &DtwConfig::default())
}

pub fn dtw_with(a: &[f64], b: &[f64], config: &DtwConfig) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("dtw of an empty sequence".into()));
    }
    Ok(dtw_cost(a, b, config).sqrt())
}

/// Accumulated squared cost, two-row table.
fn dtw_cost(a: &[f64], b: &[f64], config: &DtwConfig) -> f64 {
    let m = b.len();
    let band = config.band(a.len(), m);
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for (i, &x) in a.iter().enumerate() {
        curr.fill(f64::INFINITY);
        let lo = i.saturating_sub(band);
        let hi = (i + band + 1).min(m);
        for j in lo..hi {
            let d = x - b[j];
            let best = prev[j].min(prev[j + 1]).min(curr[j]);
            curr[j + 1] = d * d + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m]
}

/// Accumulated cost and the optimal warping path as `(i, j)` pairs from
/// `(0, 0)` to `(n-1, m-1)`. Backtracking prefers the diagonal.
fn dtw_path(a: &[f64], b: &[f64], config: &DtwConfig) -> (f64, Vec<(usize, usize)>) {
    let (n, m) = (a.len(), b.len());
    let band = config.band(n, m);
    let cols = m + 1;
    let mut acc = vec![f64::INFINITY; (n + 1) * cols];
    acc[0] = 0.0;
    for i in 0..n {
        let lo = i.saturating_sub(band);
        let hi = (i + band + 1).min(m);
        for j in lo..hi {
            let d = a[i] - b[j];
            let best = acc[i * cols + j]
                .min(acc[i * cols + j + 1])
                .min(acc[(i + 1) * cols + j]);
            acc[(i + 1) * cols + j + 1] = d * d + best;
        }
    }
    let cost = acc[n * cols + m];
    let mut path = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        path.push((i - 1, j - 1));
        let diag = acc[(i - 1) * cols + j - 1];
        let up = acc[(i - 1) * cols + j];
        let left = acc[i * cols + j - 1];
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    path.reverse();
    (cost, path)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbaConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub dtw: DtwConfig,
}

impl Default for DbaConfig {
    fn default() -> Self {
        DbaConfig {
            max_iter: 10,
            tol: 1e-6,
            dtw: DtwConfig::default(),
        }
    }
}

/// Class barycenter under DTW.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DbaPrototype {
    pub class_label: usize,
    pub values: Vec<f64>,
    pub iterations_run: usize,
    /// Sum over members of the accumulated squared DTW cost to `values`.
    pub objective: f64,
    /// Objective of the initial barycenter followed by each accepted update.
    pub objective_history: Vec<f64>,
}

/// Index of the member with the smallest total DTW distance to the others;
/// ties go to the lower index.
pub fn medoid(members: &[&[f64]], config: &DtwConfig) -> Result<usize> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("medoid of an empty set".into()));
    }
    let n = members.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let dists: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| dtw_cost(members[i], members[j], config).sqrt())
        .collect();
    let mut totals = vec![0.0; n];
    for (&(i, j), d) in pairs.iter().zip(&dists) {
        totals[i] += d;
        totals[j] += d;
    }
    Ok(totals
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| {
            if v < bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0)
}

struct Alignment {
    objective: f64,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

fn align(members: &[&[f64]], barycenter: &[f64], config: &DtwConfig) -> Alignment {
    let per_member: Vec<(f64, Vec<(usize, usize)>)> = members
        .par_iter()
        .map(|m| dtw_path(barycenter, m, config))
        .collect();
    let mut sums = vec![0.0; barycenter.len()];
    let mut counts = vec![0usize; barycenter.len()];
    let mut objective = 0.0;
    for (member, (cost, path)) in members.iter().zip(&per_member) {
        objective += cost;
        for &(bi, mi) in path {
            sums[bi] += member[mi];
            counts[bi] += 1;
        }
    }
    Alignment {
        objective,
        sums,
        counts,
    }
}

/// DTW barycenter averaging from `init`. Stops after `max_iter` updates,
/// when the relative objective improvement drops below `tol`, or when an
/// update would raise the objective (that update is discarded).
pub fn dba(members: &[&[f64]], init: &[f64], max_iter: usize, tol: f64) -> Result<DbaPrototype> {
    dba_with(
        members,
        init,
        &DbaConfig {
            max_iter,
            tol,
            dtw: DtwConfig::default(),
        },
    )
}

pub fn dba_with(members: &[&[f64]], init: &[f64], config: &DbaConfig) -> Result<DbaPrototype> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("dba needs at least one member".into()));
    }
    if init.is_empty() || members.iter().any(|m| m.is_empty()) {
        return Err(Error::InvalidArgument("dba on an empty sequence".into()));
    }
    if let Some(m) = members.iter().find(|m| m.len() != init.len()) {
        return Err(Error::LengthMismatch {
            left: init.len(),
            right: m.len(),
        });
    }
    let mut barycenter = init.to_vec();
    let mut current = align(members, &barycenter, &config.dtw);
    let mut history = vec![current.objective];
    let mut iterations_run = 0;
    for _ in 0..config.max_iter {
        iterations_run += 1;
        let updated: Vec<f64> = current
            .sums
            .iter()
            .zip(&current.counts)
            .map(|(s, &c)| s / c as f64)
            .collect();
        let next = align(members, &updated, &config.dtw);
        if next.objective > current.objective {
            break;
        }
        let improvement = if current.objective > 0.0 {
            (current.objective - next.objective) / current.objective
        } else {
            0.0
        };
        barycenter = updated;
        history.push(next.objective);
        current = next;
        if improvement < config.tol {
            break;
        }
    }
    Ok(DbaPrototype {
        class_label: 0,
        values: barycenter,
        iterations_run,
        objective: current.objective,
        objective_history: history,
    })
}

/// One medoid-initialized DBA prototype per class, in class order.
pub fn class_prototypes(ds: &LabeledDataset, config: &DbaConfig) -> Result<Vec<DbaPrototype>> {
    ds.classes()
        .iter()
        .map(|&class| {
            let members: Vec<&[f64]> = ds.class_members(class).map(|s| s.values.as_slice()).collect();
            let init = members[medoid(&members, &config.dtw)?];
            let mut proto = dba_with(&members, init, config)?;
            proto.class_label = class;
            Ok(proto)
        })
        .collect()
}

/// Smallest DTW distance between any pair of prototypes.
pub fn prototype_distance(
    src: &[DbaPrototype],
    tgt: &[DbaPrototype],
    config: &DtwConfig,
) -> Result<f64> {
    let mut best = f64::INFINITY;
    for a in src {
        for b in tgt {
            best = best.min(dtw_with(&a.values, &b.values, config)?);
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::InvalidArgument("no prototypes to compare".into()))
    }
}

/// Minimum DTW distance between per-class DBA prototypes of two datasets
/// of equal length (resample the source first).
pub fn dba_dtw_distance(src: &LabeledDataset, tgt: &LabeledDataset) -> Result<DatasetDistance> {
    dba_dtw_distance_with(src, tgt, &DbaConfig::default())
}

pub fn dba_dtw_distance_with(
    src: &LabeledDataset,
    tgt: &LabeledDataset,
    config: &DbaConfig,
) -> Result<DatasetDistance> {
    if src.length() != tgt.length() {
        return Err(Error::LengthMismatch {
            left: src.length(),
            right: tgt.length(),
        });
    }
    let value = prototype_distance(
        &class_prototypes(src, config)?,
        &class_prototypes(tgt, config)?,
        &config.dtw,
    )?;
    Ok(DatasetDistance {
        source: src.name().to_string(),
        target: tgt.name().to_string(),
        measure: Measure::DbaDtw,
        value,
    })
}
