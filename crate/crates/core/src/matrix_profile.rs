//! Matrix Profiles over concatenated per-class series.
//!
//! All series of one class are concatenated into a single sequence with a
//! boundary list; subsequences crossing a boundary are never used as
//! query or reference. The optimized kernel keeps a running sliding dot
//! product per row (STOMP-style) and is checked against
//! [`ab_join_naive`], which evaluates every pair directly.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Rows per independently seeded block of the fast kernel. Fixed so the
/// floating point path does not depend on the thread count.
const ROW_BLOCK: usize = 256;

/// Subsequence distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// L2 norm of the raw difference.
    #[default]
    Euclidean,
    /// L2 norm after z-normalizing both windows (constant windows map to 0).
    ZNormEuclidean,
    /// L1 norm of the raw difference.
    Manhattan,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::Euclidean => euclidean(a, b),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::ZNormEuclidean => {
                let (ma, sa) = mean_std(a);
                let (mb, sb) = mean_std(b);
                let za = |x: f64| if sa > STD_FLOOR { (x - ma) / sa } else { 0.0 };
                let zb = |y: f64| if sb > STD_FLOOR { (y - mb) / sb } else { 0.0 };
                a.iter()
                    .zip(b)
                    .map(|(&x, &y)| {
                        let d = za(x) - zb(y);
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }
}

const STD_FLOOR: f64 = 1e-12;

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn mean_std(w: &[f64]) -> (f64, f64) {
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// All series of one class laid end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcatenatedClassSeries {
    values: Vec<f64>,
    boundaries: Vec<usize>,
    window: usize,
    dropped: usize,
    valid: Vec<bool>,
}

impl ConcatenatedClassSeries {
    /// Concatenates `segments` in order. Segments shorter than `window`
    /// are left out and counted in [`dropped`](Self::dropped).
    pub fn new<'a, I>(segments: I, window: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        if window == 0 {
            return Err(Error::InvalidArgument("window must be positive".into()));
        }
        let mut values = Vec::new();
        let mut boundaries = Vec::new();
        let mut dropped = 0;
        for seg in segments {
            if seg.len() < window {
                dropped += 1;
                continue;
            }
            boundaries.push(values.len());
            values.extend_from_slice(seg);
        }
        let valid = valid_mask(&boundaries, values.len(), window);
        Ok(ConcatenatedClassSeries {
            values,
            boundaries,
            window,
            dropped,
            valid,
        })
    }

    /// Series of `class` in dataset order.
    pub fn from_class(ds: &LabeledDataset, class: usize, window: usize) -> Result<Self> {
        Self::new(ds.class_members(class).map(|s| s.values.as_slice()), window)
    }

    /// One concatenated series per class of `ds`.
    pub fn per_class(ds: &LabeledDataset, window: usize) -> Result<BTreeMap<usize, Self>> {
        ds.classes()
            .iter()
            .map(|&c| Ok((c, Self::from_class(ds, c, window)?)))
            .collect()
    }

    /// Joins several concatenations, keeping every original boundary.
    pub fn concat(parts: &[&ConcatenatedClassSeries]) -> Result<Self> {
        let window = parts
            .first()
            .map(|p| p.window)
            .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
        let mut segments = Vec::new();
        let mut dropped = 0;
        for p in parts {
            if p.window != window {
                return Err(Error::WindowMismatch {
                    left: window,
                    right: p.window,
                });
            }
            dropped += p.dropped;
            segments.extend(p.segments());
        }
        let mut out = Self::new(segments, window)?;
        out.dropped = dropped;
        Ok(out)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Start offset of each retained segment.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Number of input segments shorter than the window.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn segments(&self) -> impl Iterator<Item = &[f64]> {
        self.boundaries.iter().enumerate().map(move |(i, &start)| {
            let end = self
                .boundaries
                .get(i + 1)
                .copied()
                .unwrap_or(self.values.len());
            &self.values[start..end]
        })
    }

    /// Number of start positions, valid or not.
    pub fn n_positions(&self) -> usize {
        (self.values.len() + 1).saturating_sub(self.window)
    }

    pub fn is_valid(&self, pos: usize) -> bool {
        self.valid.get(pos).copied().unwrap_or(false)
    }

    /// Start positions whose window stays inside one segment.
    pub fn subsequences(&self) -> Vec<usize> {
        (0..self.n_positions()).filter(|&p| self.valid[p]).collect()
    }

    pub fn subsequence(&self, pos: usize) -> &[f64] {
        &self.values[pos..pos + self.window]
    }
}

fn valid_mask(boundaries: &[usize], len: usize, window: usize) -> Vec<bool> {
    let n_pos = (len + 1).saturating_sub(window);
    let mut valid = vec![false; n_pos];
    for (i, &start) in boundaries.iter().enumerate() {
        let end = boundaries.get(i + 1).copied().unwrap_or(len);
        if end - start >= window {
            valid[start..=end - window].fill(true);
        }
    }
    valid
}

/// Nearest-neighbour distance and index for each query position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixProfile {
    pub window: usize,
    /// `+inf` at masked positions.
    #[serde(serialize_with = "serialize_distances")]
    pub distances: Vec<f64>,
    /// `-1` at masked positions.
    pub nn_index: Vec<i64>,
    /// `true` where the query position is boundary-spanning or has no
    /// admissible neighbour.
    pub mask: Vec<bool>,
}

fn serialize_distances<S: serde::Serializer>(
    d: &[f64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(d.iter().map(|v| v.is_finite().then_some(*v)))
}

impl MatrixProfile {
    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn is_masked(&self, pos: usize) -> bool {
        self.mask[pos]
    }

    fn from_rows(window: usize, rows: Vec<Option<(f64, usize)>>) -> Self {
        let mut distances = Vec::with_capacity(rows.len());
        let mut nn_index = Vec::with_capacity(rows.len());
        let mut mask = Vec::with_capacity(rows.len());
        for row in rows {
            match row {
                Some((d, q)) => {
                    distances.push(d);
                    nn_index.push(q as i64);
                    mask.push(false);
                }
                None => {
                    distances.push(f64::INFINITY);
                    nn_index.push(-1);
                    mask.push(true);
                }
            }
        }
        MatrixProfile {
            window,
            distances,
            nn_index,
            mask,
        }
    }
}

fn check_join(
    query: &ConcatenatedClassSeries,
    reference: &ConcatenatedClassSeries,
    self_join: bool,
) -> Result<()> {
    if query.window != reference.window {
        return Err(Error::WindowMismatch {
            left: query.window,
            right: reference.window,
        });
    }
    if self_join && !(std::ptr::eq(query, reference) || query == reference) {
        return Err(Error::InvalidArgument(
            "self-join requires the query and reference to be the same series".into(),
        ));
    }
    for (side, s) in [("query", query), ("reference", reference)] {
        if !s.valid.iter().any(|&v| v) {
            return Err(Error::NoValidSubsequences {
                window: s.window,
                context: side.into(),
            });
        }
    }
    Ok(())
}

#[inline]
fn excluded(self_join: bool, r: usize, q: usize, window: usize) -> bool {
    self_join && r.abs_diff(q) < window
}

/// Raw Euclidean AB-join (or self-join with a one-window exclusion zone).
pub fn ab_join(
    query: &ConcatenatedClassSeries,
    reference: &ConcatenatedClassSeries,
    self_join: bool,
) -> Result<MatrixProfile> {
    ab_join_with(query, reference, self_join, Metric::Euclidean)
}

/// AB-join under any [`Metric`]. Ties go to the smallest reference index.
pub fn ab_join_with(
    query: &ConcatenatedClassSeries,
    reference: &ConcatenatedClassSeries,
    self_join: bool,
    metric: Metric,
) -> Result<MatrixProfile> {
    check_join(query, reference, self_join)?;
    match metric {
        Metric::Manhattan => Ok(naive_join(query, reference, self_join, metric)),
        Metric::Euclidean | Metric::ZNormEuclidean => {
            Ok(rolling_join(query, reference, self_join, metric))
        }
    }
}

/// Direct evaluation of every (query, reference) pair.
pub fn ab_join_naive(
    query: &ConcatenatedClassSeries,
    reference: &ConcatenatedClassSeries,
    self_join: bool,
    metric: Metric,
) -> Result<MatrixProfile> {
    check_join(query, reference, self_join)?;
    Ok(naive_join(query, reference, self_join, metric))
}

fn naive_join(
    query: &ConcatenatedClassSeries,
    reference: &ConcatenatedClassSeries,
    self_join: bool,
    metric: Metric,
) -> MatrixProfile {
    let w = query.window;
    let rows = (0..query.n_positions())
        .into_par_iter()
        .map(|r| {
            if !query.valid[r] {
                return None;
            }
            let a = query.subsequence(r);
            let mut best: Option<(f64, usize)> = None;
            for q in 0..reference.n_positions() {
                if !reference.valid[q] || excluded(self_join, r, q, w) {
                    continue;
                }
                let d = metric.distance(a, reference.subsequence(q));
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, q));
                }
            }
            best
        })
        .collect();
    MatrixProfile::from_rows(w, rows)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const LANES: usize = 8;

/// Advances one row of sliding dot products over `range` (which must not
/// include 0) and, when `norms` is given, returns the smallest
/// `norms[q] - 2 qt[q]` in the range with its first position.
#[allow(clippy::too_many_arguments)]
fn roll_range(
    curr: &mut [f64],
    prev: &[f64],
    b: &[f64],
    window: usize,
    drop_a: f64,
    add_a: f64,
    norms: Option<&[f64]>,
    range: std::ops::Range<usize>,
) -> Option<(f64, usize)> {
    let (s, e) = (range.start, range.end);
    if s >= e {
        return None;
    }
    debug_assert!(s >= 1);
    let curr = &mut curr[s..e];
    let prev = &prev[s - 1..e - 1];
    let out_b = &b[s - 1..e - 1];
    let in_b = &b[s - 1 + window..e - 1 + window];
    let Some(norms) = norms else {
        for (((slot, &p), &o), &i) in curr.iter_mut().zip(prev).zip(out_b).zip(in_b) {
            *slot = p - drop_a * o + add_a * i;
        }
        return None;
    };
    let norms = &norms[s..e];
    let mut lanes = [f64::INFINITY; LANES];
    let full = curr.len() / LANES * LANES;
    for ((((c, p), o), i), n) in curr[..full]
        .chunks_exact_mut(LANES)
        .zip(prev.chunks_exact(LANES))
        .zip(out_b.chunks_exact(LANES))
        .zip(in_b.chunks_exact(LANES))
        .zip(norms.chunks_exact(LANES))
    {
        let c: &mut [f64; LANES] = c.try_into().expect("exact chunk");
        let p: &[f64; LANES] = p.try_into().expect("exact chunk");
        let o: &[f64; LANES] = o.try_into().expect("exact chunk");
        let i: &[f64; LANES] = i.try_into().expect("exact chunk");
        let n: &[f64; LANES] = n.try_into().expect("exact chunk");
        for l in 0..LANES {
            let v = p[l] - drop_a * o[l] + add_a * i[l];
            c[l] = v;
            let score = n[l] - 2.0 * v;
            lanes[l] = if score < lanes[l] { score } else { lanes[l] };
        }
    }
    let mut best = lanes
        .iter()
        .fold(f64::INFINITY, |m, &v| if v < m { v } else { m });
    for i in full..curr.len() {
        let v = prev[i] - drop_a * out_b[i] + add_a * in_b[i];
        curr[i] = v;
        let score = norms[i] - 2.0 * v;
        if score < best {
            best = score;
        }
    }
    if !best.is_finite() {
        return None;
    }
    // Same expression, same bits: the first match is the leftmost minimum.
    let hit = curr
        .chunks(LANES)
        .zip(norms.chunks(LANES))
        .enumerate()
        .find_map(|(k, (c, n))| {
            c.iter()
                .zip(n)
                .position(|(v, m)| m - 2.0 * v == best)
                .map(|off| k * LANES + off)
        });
    hit.map(|i| (best, s + i))
}

/// Smaller score wins; equal scores go to the smaller position.
#[inline]
fn pick(current: Option<(f64, usize)>, cand: (f64, usize)) -> Option<(f64, usize)> {
    match current {
        Some(c) if c.0 < cand.0 || (c.0 == cand.0 && c.1 < cand.1) => Some(c),
        _ => Some(cand),
    }
}

fn window_stats(s: &ConcatenatedClassSeries) -> Vec<(f64, f64)> {
    (0..s.n_positions())
        .map(|p| mean_std(s.subsequence(p)))
        .collect()
}

fn rolling_join(
    query: &ConcatenatedClassSeries,
    reference: &ConcatenatedClassSeries,
    self_join: bool,
    metric: Metric,
) -> MatrixProfile {
    let w = query.window;
    let wf = w as f64;
    let a = &query.values;
    let b = &reference.values;
    let n_q = query.n_positions();
    let n_r = reference.n_positions();
    let euclidean = metric == Metric::Euclidean;
    // |B_q|^2 at valid reference positions, +inf elsewhere, so the row
    // minimum of |B_q|^2 - 2 <A_r, B_q> is the nearest neighbour.
    let norms: Vec<f64> = (0..n_r)
        .map(|q| {
            if reference.valid[q] {
                reference.subsequence(q).iter().map(|x| x * x).sum()
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let (q_stats, r_stats) = if euclidean {
        (Vec::new(), Vec::new())
    } else {
        (window_stats(query), window_stats(reference))
    };
    let znorm_best = |r: usize, qt: &[f64], range: std::ops::Range<usize>| {
        let (ma, sa) = q_stats[r];
        let mut best: Option<(f64, usize)> = None;
        for q in range {
            if !reference.valid[q] {
                continue;
            }
            let (mb, sb) = r_stats[q];
            let d2 = match (sa > STD_FLOOR, sb > STD_FLOOR) {
                (false, false) => 0.0,
                (true, false) | (false, true) => wf,
                (true, true) => 2.0 * wf * (1.0 - (qt[q] - wf * ma * mb) / (wf * sa * sb)),
            };
            if best.is_none_or(|(bd, _)| d2 < bd) {
                best = Some((d2, q));
            }
        }
        best
    };

    let blocks: Vec<usize> = (0..n_q).step_by(ROW_BLOCK).collect();
    let rows: Vec<Option<(f64, usize)>> = blocks
        .into_par_iter()
        .flat_map_iter(|start| {
            let end = (start + ROW_BLOCK).min(n_q);
            let mut out = Vec::with_capacity(end - start);
            if !query.valid[start..end].iter().any(|&v| v) {
                out.resize(end - start, None);
                return out;
            }
            let mut prev = vec![0.0; n_r];
            let mut curr = vec![0.0; n_r];
            for r in start..end {
                let valid = query.valid[r];
                // Excluded band [lo, hi) of a self-join; empty otherwise.
                let (lo, hi) = if self_join {
                    ((r + 1).saturating_sub(w).min(n_r), (r + w).min(n_r))
                } else {
                    (n_r, n_r)
                };
                let mut best: Option<(f64, usize)> = None;
                curr[0] = dot(&a[r..r + w], &b[..w]);
                if r == start {
                    let head = &a[r..r + w];
                    for (q, slot) in curr.iter_mut().enumerate().skip(1) {
                        *slot = dot(head, &b[q..q + w]);
                    }
                    if valid && euclidean {
                        for q in (0..lo).chain(hi..n_r) {
                            let score = norms[q] - 2.0 * curr[q];
                            if score.is_finite() {
                                best = pick(best, (score, q));
                            }
                        }
                    }
                } else {
                    let (drop_a, add_a) = (a[r - 1], a[r + w - 1]);
                    let scored = (valid && euclidean).then_some(norms.as_slice());
                    if let Some(norms) = scored {
                        if lo > 0 {
                            let score = norms[0] - 2.0 * curr[0];
                            if score.is_finite() {
                                best = Some((score, 0));
                            }
                        }
                    }
                    let first = lo.max(1);
                    for (range, scoring) in [(1..first, scored), (first..hi.max(first), None), (hi.max(first)..n_r, scored)] {
                        if let Some(found) =
                            roll_range(&mut curr, &prev, b, w, drop_a, add_a, scoring, range)
                        {
                            best = pick(best, found);
                        }
                    }
                }
                if valid && !euclidean {
                    let left = znorm_best(r, &curr, 0..lo);
                    let right = znorm_best(r, &curr, hi..n_r);
                    best = match (left, right) {
                        (Some(l), Some(rt)) => Some(if rt.0 < l.0 { rt } else { l }),
                        (l, rt) => l.or(rt),
                    };
                }
                // The running product only ranks candidates; the reported
                // distance is recomputed exactly.
                out.push(if valid {
                    best.map(|(_, q)| {
                        (
                            metric.distance(query.subsequence(r), reference.subsequence(q)),
                            q,
                        )
                    })
                } else {
                    None
                });
                std::mem::swap(&mut prev, &mut curr);
            }
            out
        })
        .collect();
    MatrixProfile::from_rows(w, rows)
}

/// One-vs-all profiles for class `class`: the self-join of its own series
/// and the AB-join against every other class concatenated.
pub fn cross_class_profiles(
    per_class: &BTreeMap<usize, ConcatenatedClassSeries>,
    class: usize,
) -> Result<(MatrixProfile, MatrixProfile)> {
    cross_class_profiles_with(per_class, class, Metric::Euclidean)
}

pub fn cross_class_profiles_with(
    per_class: &BTreeMap<usize, ConcatenatedClassSeries>,
    class: usize,
    metric: Metric,
) -> Result<(MatrixProfile, MatrixProfile)> {
    if per_class.len() < 2 {
        return Err(Error::TooFewClasses(per_class.len()));
    }
    let own_series = per_class
        .get(&class)
        .ok_or_else(|| Error::InvalidArgument(format!("class {class} not present")))?;
    if own_series.subsequences().is_empty() {
        return Err(Error::NoValidSubsequences {
            window: own_series.window,
            context: format!("class {class}"),
        });
    }
    let others: Vec<&ConcatenatedClassSeries> = per_class
        .iter()
        .filter(|(&c, _)| c != class)
        .map(|(_, s)| s)
        .collect();
    let rest = ConcatenatedClassSeries::concat(&others)?;
    let own = ab_join_with(own_series, own_series, true, metric)?;
    let other = ab_join_with(own_series, &rest, false, metric)?;
    Ok((own, other))
}
