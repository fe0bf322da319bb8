//! Independent reference implementations and data generators shared by
//! the integration tests. Nothing here calls into the code under test
//! except to build inputs.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use shapesel::dataset::{LabeledDataset, LabeledSeries};

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc.sqrt()
}

/// Concatenation of `segments` (skipping those shorter than `w`) and the
/// start positions whose window stays inside one segment.
pub fn concat_positions(segments: &[Vec<f64>], w: usize) -> (Vec<f64>, Vec<bool>) {
    let mut values = Vec::new();
    let mut spans = Vec::new();
    for s in segments {
        if s.len() >= w {
            spans.push((values.len(), values.len() + s.len()));
            values.extend_from_slice(s);
        }
    }
    let n_pos = if values.len() >= w { values.len() - w + 1 } else { 0 };
    let valid = (0..n_pos)
        .map(|p| spans.iter().any(|&(a, b)| p >= a && p + w <= b))
        .collect();
    (values, valid)
}

/// Double-loop nearest-neighbour distances; `None` at invalid query
/// positions and where no admissible neighbour exists.
pub fn brute_profile(
    query: &[Vec<f64>],
    reference: &[Vec<f64>],
    w: usize,
    self_join: bool,
) -> Vec<Option<f64>> {
    let (qv, qvalid) = concat_positions(query, w);
    let (rv, rvalid) = concat_positions(reference, w);
    (0..qvalid.len())
        .map(|r| {
            if !qvalid[r] {
                return None;
            }
            let mut best: Option<f64> = None;
            for q in 0..rvalid.len() {
                if !rvalid[q] || (self_join && (r as i64 - q as i64).abs() < w as i64) {
                    continue;
                }
                let d = l2(&qv[r..r + w], &rv[q..q + w]);
                if best.is_none_or(|b| d < b) {
                    best = Some(d);
                }
            }
            best
        })
        .collect()
}

/// Scores every subsequence of each class by (min distance to the other
/// classes) - (min non-trivial distance within the class) and picks
/// the top `k` greedily with the same tie and overlap rules.
pub fn exhaustive_shapelet_positions(ds: &LabeledDataset, w: usize, k: usize) -> Vec<Vec<usize>> {
    let segs = |pred: &dyn Fn(usize) -> bool| -> Vec<Vec<f64>> {
        ds.series()
            .iter()
            .filter(|s| pred(s.label))
            .map(|s| s.values.clone())
            .collect()
    };
    ds.classes()
        .iter()
        .map(|&c| {
            let own = segs(&|l| l == c);
            let mut rest = Vec::new();
            for &o in ds.classes() {
                if o != c {
                    rest.extend(segs(&|l| l == o));
                }
            }
            let inside = brute_profile(&own, &own, w, true);
            let outside = brute_profile(&own, &rest, w, false);
            let mut scored: Vec<(f64, usize)> = inside
                .iter()
                .zip(&outside)
                .enumerate()
                .filter_map(|(p, (i, o))| match (i, o) {
                    (Some(i), Some(o)) => Some((o - i, p)),
                    _ => None,
                })
                .collect();
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            let mut picked: Vec<usize> = Vec::new();
            for (_, p) in scored {
                if picked.len() == k {
                    break;
                }
                if picked.iter().all(|&q| (p as i64 - q as i64).abs() >= w as i64) {
                    picked.push(p);
                }
            }
            picked
        })
        .collect()
}

/// Top-down memoized DTW with squared local cost and a final square root.
pub fn dtw_memo(a: &[f64], b: &[f64]) -> f64 {
    fn go(i: usize, j: usize, a: &[f64], b: &[f64], memo: &mut HashMap<(usize, usize), f64>) -> f64 {
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let cost = (a[i] - b[j]).powi(2);
        let v = if i == 0 && j == 0 {
            cost
        } else if i == 0 {
            cost + go(0, j - 1, a, b, memo)
        } else if j == 0 {
            cost + go(i - 1, 0, a, b, memo)
        } else {
            cost + go(i - 1, j - 1, a, b, memo)
                .min(go(i - 1, j, a, b, memo))
                .min(go(i, j - 1, a, b, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a.len() - 1, b.len() - 1, a, b, &mut HashMap::new()).sqrt()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller keeps the generator self-contained.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn noise(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng) * scale).collect()
}

pub fn random_walk(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x += gaussian(rng);
            x
        })
        .collect()
}

pub fn dataset(name: &str, rows: Vec<(Vec<f64>, usize)>) -> LabeledDataset {
    let k = rows.iter().map(|r| r.1).max().unwrap() + 1;
    LabeledDataset::new(
        name,
        rows.into_iter()
            .map(|(values, label)| LabeledSeries { values, label })
            .collect(),
        (0..k).map(|c| c as f64).collect(),
    )
    .unwrap()
}
