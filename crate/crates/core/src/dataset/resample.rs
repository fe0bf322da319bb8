use serde::{Deserialize, Serialize};

use super::{LabeledDataset, LabeledSeries};
use crate::error::{Error, Result};

/// Smoothing widths at or below this are treated as "no smoothing".
pub const SIGMA_EPSILON: f64 = 1e-6;

/// Target length and Gaussian width (in source time steps) for one resize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleSpec {
    pub target_length: usize,
    #[serde(rename = "sigma")]
    pub smoothing_sigma: f64,
}

impl ResampleSpec {
    pub fn new(target_length: usize, smoothing_sigma: f64) -> Result<Self> {
        if target_length < 2 {
            return Err(Error::InvalidArgument(format!(
                "target length must be at least 2, got {target_length}"
            )));
        }
        if !(smoothing_sigma > 0.0 && smoothing_sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "smoothing sigma must be positive, got {smoothing_sigma}"
            )));
        }
        Ok(ResampleSpec {
            target_length,
            smoothing_sigma,
        })
    }

    /// Spec for resizing a series of `source_length` steps, with the
    /// anti-aliasing width picked by [`sigma_for`].
    pub fn for_lengths(source_length: usize, target_length: usize) -> Result<Self> {
        Self::new(target_length, sigma_for(source_length, target_length))
    }
}

/// Half the shrink ratio when downsampling, `SIGMA_EPSILON` otherwise.
pub fn sigma_for(source_length: usize, target_length: usize) -> f64 {
    if target_length < source_length {
        let ratio = source_length as f64 / target_length as f64;
        (ratio / 2.0).max(SIGMA_EPSILON)
    } else {
        SIGMA_EPSILON
    }
}

/// Convolves with a normalized Gaussian kernel truncated at 4 sigma,
/// replicating the edge values as padding.
pub fn gaussian_smooth(series: &[f64], sigma: f64) -> Vec<f64> {
    if sigma <= SIGMA_EPSILON || series.len() < 2 {
        return series.to_vec();
    }
    let radius = (4.0 * sigma).ceil() as usize;
    let mut kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let x = i as f64 - radius as f64;
            (-0.5 * (x / sigma).powi(2)).exp()
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= norm);

    let n = series.len() as isize;
    let last = series.len() - 1;
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(j, k)| {
                    let idx = (i + j as isize - radius as isize).clamp(0, n - 1) as usize;
                    k * series[idx.min(last)]
                })
                .sum()
        })
        .collect()
}

/// Samples `target_length` equally spaced points over `[0, n-1]`.
pub fn linear_interpolate(series: &[f64], target_length: usize) -> Vec<f64> {
    let n = series.len();
    if n == 1 || target_length == 1 {
        return vec![series[0]; target_length];
    }
    let steps = (target_length - 1) as f64;
    (0..target_length)
        .map(|i| {
            // i * (n - 1) is computed exactly before the division so that
            // equal lengths hit the grid points exactly.
            let pos = (i * (n - 1)) as f64 / steps;
            let lo = (pos.floor() as usize).min(n - 1);
            if lo == n - 1 {
                return series[n - 1];
            }
            let frac = pos - lo as f64;
            if frac == 0.0 {
                series[lo]
            } else {
                series[lo] * (1.0 - frac) + series[lo + 1] * frac
            }
        })
        .collect()
}

/// Gaussian smoothing followed by linear interpolation to the target length.
pub fn resample(series: &[f64], spec: &ResampleSpec) -> Vec<f64> {
    assert!(!series.is_empty(), "cannot resample an empty series");
    let smoothed = gaussian_smooth(series, spec.smoothing_sigma);
    linear_interpolate(&smoothed, spec.target_length)
}

/// Resizes every series of `ds` to `target_length`; labels are untouched.
pub fn resample_dataset(ds: &LabeledDataset, target_length: usize) -> Result<LabeledDataset> {
    let spec = ResampleSpec::for_lengths(ds.length(), target_length)?;
    let series = ds
        .series()
        .iter()
        .map(|s| LabeledSeries {
            values: resample(&s.values, &spec),
            label: s.label,
        })
        .collect();
    Ok(
        LabeledDataset::new(ds.name(), series, ds.raw_labels().to_vec())?
            .with_resample(spec),
    )
}
