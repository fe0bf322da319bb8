//! Source dataset selection for time series transfer learning.
//!
//! Candidate source datasets are ranked against a target by comparing
//! class-discriminative shapelets found with Matrix Profiles; the chosen
//! sources are then merged into one balanced, resampled super dataset with
//! a concatenated label space for multi-source pre-training.

pub mod dataset;
pub mod distance;
pub mod error;
pub mod leep;
pub mod matrix_profile;
pub mod pipeline;
pub mod shapelet;

pub use error::{Error, Result};
