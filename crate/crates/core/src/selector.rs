// SPDX-License-Identifier: MIT OR Apache-2.0

//! Threshold selection over the nested family of detected splits.
//!
//! Levels are visited from the largest set down. A split `η` new at level
//! `i` is bracketed by its neighbours in level `i - 1` (or the sentinels `1`
//! and `T`), and the two sides are compared along `N` random unit
//! directions with a two-sample Kolmogorov-Smirnov statistic. With
//! `a = sqrt(n1 n2 / (n1 + n2)) D`, the p-value is `exp(-2 a²)`; the `N`
//! p-values are Benjamini-Hochberg adjusted and `η` is declared when the
//! smallest adjusted value is at most `alpha`. The first level with a
//! declaration is returned.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{ChangePointSet, Sample};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use crate::segmenter::{splits_to_change_points, ThresholdPath};

pub const DEFAULT_DIRECTIONS: usize = 200;
pub const DEFAULT_ALPHA: f64 = 0.0005;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectorConfig {
    /// Number of random projection directions `N`.
    pub directions: usize,
    /// BH declaration cutoff.
    pub alpha: f64,
    pub seed: u64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            directions: DEFAULT_DIRECTIONS,
            alpha: DEFAULT_ALPHA,
            seed: 0,
        }
    }
}

impl SelectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.directions == 0 {
            return Err(Error::InvalidConfig("number of directions N must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1); got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// `count` unit vectors in `R^dim`, normalized standard Gaussians.
pub fn random_directions<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

/// Two-sample KS statistic `sup_x |F_a(x) - F_b(x)|` with right-continuous
/// empirical CDFs, evaluated at the pooled sample points.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok(ks_sorted(&a, &b))
}

fn ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    // Once one side is exhausted its CDF is 1 and the other only grows
    // toward 1, so the remaining differences are no larger.
    d
}

/// `exp(-2 a²)` with `a = sqrt(n1 n2 / (n1 + n2)) D`, clamped to `(0, 1]`.
pub fn ks_pvalue(d: f64, n1: usize, n2: usize) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    let a2 = n1 * n2 / (n1 + n2) * d * d;
    (-2.0 * a2).exp().clamp(f64::MIN_POSITIVE, 1.0)
}

/// Benjamini-Hochberg adjusted p-values, in input order.
pub fn bh_adjust(pvalues: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidPValue(bad));
    }
    let n = pvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| pvalues[x].total_cmp(&pvalues[y]).then(x.cmp(&y)));
    let mut out = vec![0.0; n];
    let mut running = 1.0f64;
    for (k, &idx) in order.iter().enumerate().rev() {
        let rank = k + 1;
        running = running.min((pvalues[idx] * (n as f64 / rank as f64)).min(1.0));
        out[idx] = running;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateTest {
    pub declared: bool,
    pub min_adjusted_p: f64,
}

/// Tests whether rows `left+1..=eta` and `eta+1..=right` differ in law.
pub fn test_candidate<R: Rng + ?Sized>(
    sample: &Sample,
    eta: usize,
    left: usize,
    right: usize,
    cfg: &SelectorConfig,
    rng: &mut R,
) -> Result<CandidateTest> {
    if !(left < eta && eta < right && right <= sample.len()) {
        return Err(Error::DegenerateSplit { eta, left, right });
    }
    let dirs = random_directions(sample.dim(), cfg.directions, rng);
    let (n1, n2) = (eta - left, right - eta);
    let pvalues: Vec<f64> = dirs
        .par_iter()
        .map(|v| {
            let project = |t: usize| -> f64 {
                sample.row0(t).iter().zip(v).map(|(x, w)| x * w).sum()
            };
            let mut lhs: Vec<f64> = (left..eta).map(project).collect();
            let mut rhs: Vec<f64> = (eta..right).map(project).collect();
            lhs.sort_by(f64::total_cmp);
            rhs.sort_by(f64::total_cmp);
            ks_pvalue(ks_sorted(&lhs, &rhs), n1, n2)
        })
        .collect();
    let adjusted = bh_adjust(&pvalues)?;
    let min_adjusted_p = adjusted.iter().copied().fold(1.0, f64::min);
    Ok(CandidateTest {
        declared: min_adjusted_p <= cfg.alpha,
        min_adjusted_p,
    })
}

/// Bracket `(η₁, η₂)` of `eta` within `prev` (sorted), with sentinels 1 and `len`.
pub fn bracket(eta: usize, prev: &[usize], len: usize) -> (usize, usize) {
    let pos = prev.partition_point(|&x| x < eta);
    let lo = if pos > 0 { prev[pos - 1] } else { 1 };
    let hi = prev[pos..].iter().copied().find(|&x| x > eta).unwrap_or(len);
    (lo, hi)
}

/// One candidate evaluated during selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    /// 1-based level index `i`.
    pub level: usize,
    pub eta: usize,
    pub left: usize,
    pub right: usize,
    /// `None` when the bracket leaves one side empty.
    pub min_adjusted_p: Option<f64>,
    pub declared: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Selected splits (the chosen level), sorted.
    pub splits: Vec<usize>,
    /// Change points `b + 1` for the selected splits.
    pub change_points: ChangePointSet,
    /// Level index of the selection, `0` for the empty set.
    pub level: usize,
    pub tests: Vec<TestRecord>,
}

/// Top-down search over nested levels `S_1 ⊂ ... ⊂ S_m` of splits.
pub fn select_from_levels(
    sample: &Sample,
    levels: &[Vec<usize>],
    cfg: &SelectorConfig,
) -> Result<Selection> {
    cfg.validate()?;
    let len = sample.len();
    let mut tests = Vec::new();
    for i in (1..=levels.len()).rev() {
        let current = &levels[i - 1];
        let prev: &[usize] = if i >= 2 { &levels[i - 2] } else { &[] };
        let fresh: Vec<usize> = current
            .iter()
            .copied()
            .filter(|x| prev.binary_search(x).is_err())
            .collect();
        let outcomes: Vec<TestRecord> = fresh
            .par_iter()
            .map(|&eta| {
                let (left, right) = bracket(eta, prev, len);
                let mut stream =
                    rng::stream(cfg.seed, Domain::Directions, &[i as u64, eta as u64]);
                match test_candidate(sample, eta, left, right, cfg, &mut stream) {
                    Ok(t) => Ok(TestRecord {
                        level: i,
                        eta,
                        left,
                        right,
                        min_adjusted_p: Some(t.min_adjusted_p),
                        declared: t.declared,
                    }),
                    Err(Error::DegenerateSplit { .. }) => Ok(TestRecord {
                        level: i,
                        eta,
                        left,
                        right,
                        min_adjusted_p: None,
                        declared: false,
                    }),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        let any = outcomes.iter().any(|t| t.declared);
        tests.extend(outcomes);
        if any {
            return Ok(Selection {
                splits: current.clone(),
                change_points: splits_to_change_points(current),
                level: i,
                tests,
            });
        }
    }
    Ok(Selection {
        tests,
        ..Default::default()
    })
}

/// Automatic model selection over a recorded threshold path.
pub fn auto_select(sample: &Sample, path: &ThresholdPath, cfg: &SelectorConfig) -> Result<ChangePointSet> {
    Ok(select_from_levels(sample, &path.levels(), cfg)?.change_points)
}
