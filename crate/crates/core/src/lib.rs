// SPDX-License-Identifier: MIT OR Apache-2.0

//! Multivariate nonparametric change-point localization.
//!
//! A sample `X(1), ..., X(T)` in `R^p` is segmented by maximizing a CUSUM
//! contrast of segment kernel density estimates over a collection of random
//! intervals (wild binary segmentation). The threshold is chosen
//! automatically by testing candidate change points with projected
//! two-sample Kolmogorov-Smirnov statistics under Benjamini-Hochberg control.
//!
//! Module layout:
//!
//! - [`data`]: samples, intervals, change-point sets and CSV ingestion.
//! - [`kernel`]: kernel families, segment KDE and the prefix-summed Gram.
//! - [`cusum`]: the kernel CUSUM statistic and its profile over an interval.
//! - [`segmenter`]: random intervals and the recursive detector.
//! - [`selector`]: projected KS tests and the top-down model selection.
//! - [`simulator`]: seeded generators for the five benchmark scenarios.
//! - [`metrics`]: count error and one-sided Hausdorff distances.
//! - [`rng`]: the seeded, stream-split random number generator.
//!
//! Index conventions: rows are 1-based (`1..=T`) in every public API. An
//! [`Interval`] `(s, e)` covers rows `s+1..=e`. A split `b` separates rows
//! `..=b` from `b+1..`; the reported change point is `b + 1`, the first row
//! of the new regime.

#![forbid(unsafe_code)]

pub mod cusum;
pub mod data;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod segmenter;
pub mod selector;
pub mod simulator;

pub use data::{ChangePointSet, DetectionRecord, Interval, Sample};
pub use error::{Error, Result};
pub use kernel::{KernelFamily, KernelGram, KernelSpec};
pub use metrics::{Distance, EvalResult, Summary};
pub use segmenter::{Bandwidth, SegmenterConfig, ThresholdPath};
pub use selector::SelectorConfig;
