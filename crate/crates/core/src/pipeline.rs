// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end detection: threshold path plus automatic selection, or a
//! single fixed-threshold run.

use serde::{Deserialize, Serialize};

use crate::data::{ChangePointSet, Sample};
use crate::error::Result;
use crate::segmenter::{splits_to_change_points, Detector, ResolvedParams, SegmenterConfig, ThresholdPath};
use crate::selector::{select_from_levels, Selection, SelectorConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub segmenter: SegmenterConfig,
    pub selector: SelectorConfig,
    /// Build the nested family by rerunning the fixed-threshold recursion
    /// at each recorded level instead of thresholding the path.
    pub exact_tau: bool,
}

impl DetectConfig {
    /// Defaults with one seed shared by interval and direction draws.
    pub fn with_seed(seed: u64) -> Self {
        let mut cfg = Self::default();
        cfg.segmenter.seed = seed;
        cfg.selector.seed = seed;
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub change_points: ChangePointSet,
    pub path: ThresholdPath,
    pub params: ResolvedParams,
    /// Present when the threshold was selected automatically.
    pub selection: Option<Selection>,
    pub used_gram: bool,
}

/// Thresholds strictly between consecutive recorded levels, so that a run
/// at `thresholds[i]` keeps exactly the splits with `a >= taus[i]`.
pub fn level_thresholds(path: &ThresholdPath) -> Vec<f64> {
    let taus = &path.taus;
    (0..taus.len())
        .map(|i| match taus.get(i + 1) {
            Some(next) => 0.5 * (taus[i] + next),
            None => f64::NEG_INFINITY,
        })
        .collect()
}

/// Nested levels obtained by rerunning the thresholded recursion.
pub fn exact_levels(det: &Detector<'_>, path: &ThresholdPath) -> Vec<Vec<usize>> {
    level_thresholds(path)
        .into_iter()
        .map(|tau| det.detect_splits(tau))
        .collect()
}

/// Fraction of levels at which the exact rerun differs from the path.
pub fn path_discrepancy(det: &Detector<'_>, path: &ThresholdPath) -> f64 {
    let levels = path.levels();
    if levels.is_empty() {
        return 0.0;
    }
    let exact = exact_levels(det, path);
    let differing = levels.iter().zip(&exact).filter(|(a, b)| a != b).count();
    differing as f64 / levels.len() as f64
}

pub fn run_detection(sample: &Sample, cfg: &DetectConfig) -> Result<DetectionOutcome> {
    cfg.selector.validate()?;
    let det = Detector::new(sample, &cfg.segmenter)?;
    let used_gram = det.uses_gram();
    let params = *det.params();
    if let Some(tau) = cfg.segmenter.tau {
        let records = det.detect_records(tau);
        let splits: Vec<usize> = records.iter().map(|r| r.b).collect();
        return Ok(DetectionOutcome {
            change_points: splits_to_change_points(&splits),
            path: ThresholdPath::from_records(records),
            params,
            selection: None,
            used_gram,
        });
    }
    let path = det.path();
    let levels = if cfg.exact_tau {
        exact_levels(&det, &path)
    } else {
        path.levels()
    };
    let selection = select_from_levels(sample, &levels, &cfg.selector)?;
    Ok(DetectionOutcome {
        change_points: selection.change_points.clone(),
        path,
        params,
        selection: Some(selection),
        used_gram,
    })
}
