// SPDX-License-Identifier: MIT OR Apache-2.0

//! Wild binary segmentation with the kernel CUSUM statistic.
//!
//! On a working interval `(s, e)` every random interval is intersected with
//! `[s, e]`. Intersections longer than `2 * buffer + 1` are scanned over
//! `t in [s_m + buffer, e_m - buffer]`; the interval with the largest
//! statistic (smallest index on ties) proposes the split `b`. If the
//! statistic exceeds the threshold the split is kept and the recursion
//! continues on `(s, b)` and `(b + 1, e)`.
//!
//! [`detection_path`] runs the recursion without a threshold and records
//! every split with its statistic. Thresholding the record at `τ` yields the
//! nested family `S(τ) = {b : a > τ}`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cusum::{admits_scan, best_split};
use crate::data::{ChangePointSet, DetectionRecord, Interval, Sample};
use crate::error::{Error, Result};
use crate::kernel::{
    build_gram_with_budget, DirectSums, KernelFamily, KernelGram, KernelSpec, KernelSums,
    DEFAULT_GRAM_BUDGET,
};
use crate::rng::{self, Domain};

pub const DEFAULT_INTERVALS: usize = 50;

/// `5 (30 ln T / T)^{1/p}`.
pub fn default_bandwidth(len: usize, dim: usize) -> f64 {
    let t = len as f64;
    5.0 * (30.0 * t.ln() / t).powf(1.0 / dim as f64)
}

/// Minimum distance of a split from the ends of its interval:
/// `max(1, ceil(h^{-p}))`.
pub fn buffer_len(h: f64, dim: usize) -> usize {
    let raw = h.powf(-(dim as f64));
    // Absorb round-off so that e.g. h = 1/3, p = 1 gives 3 rather than 4.
    let adjusted = raw * (1.0 - 1e-12);
    if !adjusted.is_finite() || adjusted > usize::MAX as f64 / 4.0 {
        return usize::MAX / 4;
    }
    (adjusted.ceil() as usize).max(1)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    #[default]
    Auto,
    Fixed(f64),
}

impl Bandwidth {
    pub fn resolve(&self, len: usize, dim: usize) -> f64 {
        match *self {
            Self::Auto => default_bandwidth(len.max(2), dim),
            Self::Fixed(h) => h,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmenterConfig {
    /// Number of random intervals `M`.
    pub intervals: usize,
    pub bandwidth: Bandwidth,
    pub kernel: KernelFamily,
    /// Threshold for [`mnp_detect`]; ignored by [`detection_path`].
    pub tau: Option<f64>,
    pub seed: u64,
    /// Defaults to `2 * buffer + 2`.
    pub min_interval_len: Option<usize>,
    pub max_interval_len: Option<usize>,
    /// Append the whole sample `(0, T)` to the random intervals.
    pub include_full_interval: bool,
    /// Memory budget for the kernel Gram, in bytes.
    pub gram_budget: u64,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            intervals: DEFAULT_INTERVALS,
            bandwidth: Bandwidth::Auto,
            kernel: KernelFamily::Gaussian,
            tau: None,
            seed: 0,
            min_interval_len: None,
            max_interval_len: None,
            include_full_interval: true,
            gram_budget: DEFAULT_GRAM_BUDGET,
        }
    }
}

/// Configuration values resolved against a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub h: f64,
    pub buffer: usize,
    pub min_interval_len: usize,
    pub max_interval_len: Option<usize>,
}

impl SegmenterConfig {
    pub fn resolve(&self, len: usize, dim: usize) -> Result<ResolvedParams> {
        if self.intervals == 0 {
            return Err(Error::InvalidConfig("number of intervals M must be >= 1".into()));
        }
        let h = self.bandwidth.resolve(len, dim);
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be finite and > 0; got {h}"
            )));
        }
        if let Some(tau) = self.tau {
            if tau.is_nan() {
                return Err(Error::InvalidConfig("tau must not be NaN".into()));
            }
        }
        let buffer = buffer_len(h, dim);
        let floor = 2 * buffer + 2;
        let min_len = self.min_interval_len.unwrap_or(floor);
        if min_len < floor {
            return Err(Error::InvalidConfig(format!(
                "min_interval_len {min_len} below 2 * buffer + 2 = {floor}"
            )));
        }
        Ok(ResolvedParams {
            h,
            buffer,
            min_interval_len: min_len,
            max_interval_len: self.max_interval_len,
        })
    }
}

/// Draws `count` intervals with endpoints uniform on rows `1..=len`.
///
/// Two rows `α, β` are drawn independently and ordered; the interval covers
/// rows `α..=β`, i.e. `(α - 1, β)`. Draws are conditioned on the length
/// `β - α + 1` lying in `[min_len, max_len]`. The conditional law is sampled
/// directly rather than by rejection, so narrow constraints cost nothing.
pub fn generate_intervals<R: Rng + ?Sized>(
    len: usize,
    count: usize,
    min_len: usize,
    max_len: Option<usize>,
    rng: &mut R,
) -> Result<Vec<Interval>> {
    let lo = min_len.max(1);
    let hi = max_len.unwrap_or(len).min(len);
    if len == 0 || lo > hi {
        return Err(Error::Unsatisfiable(format!(
            "no interval of length in [{min_len}, {}] fits in T = {len}",
            max_len.map_or("T".to_string(), |m| m.to_string())
        )));
    }
    // An ordered pair (α < β) arises from two draws, a tie from one, so the
    // length-L class has weight (len - L + 1) * (L == 1 ? 1 : 2).
    let lengths: Vec<usize> = (lo..=hi).collect();
    let mut cumulative = Vec::with_capacity(lengths.len());
    let mut total: u128 = 0;
    for &l in &lengths {
        total += (len - l + 1) as u128 * if l == 1 { 1 } else { 2 };
        cumulative.push(total);
    }
    let total = u64::try_from(total)
        .map_err(|_| Error::Unsatisfiable("sample too long for interval sampling".into()))?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u = rng.random_range(0..total) as u128;
        let k = cumulative.partition_point(|&c| c <= u);
        let l = lengths[k];
        let start = rng.random_range(1..=len - l + 1);
        out.push(Interval {
            s: start - 1,
            e: start - 1 + l,
        });
    }
    Ok(out)
}

/// Intervals for a detection run: `M` random ones plus, optionally, `(0, T)`.
pub fn intervals_for(len: usize, cfg: &SegmenterConfig, params: &ResolvedParams) -> Result<Vec<Interval>> {
    let mut stream = rng::stream(cfg.seed, Domain::Intervals, &[]);
    let mut ivs = generate_intervals(
        len,
        cfg.intervals,
        params.min_interval_len,
        params.max_interval_len,
        &mut stream,
    )?;
    if cfg.include_full_interval {
        ivs.push(Interval { s: 0, e: len });
    }
    Ok(ivs)
}

/// Recorded splits of an unthresholded run, sorted by decreasing statistic.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPath {
    /// Sorted by decreasing `a`, ties by increasing `b`.
    pub records: Vec<DetectionRecord>,
    /// Distinct `a` values in decreasing order.
    pub taus: Vec<f64>,
}

impl ThresholdPath {
    pub fn from_records(mut records: Vec<DetectionRecord>) -> Self {
        records.sort_by(|x, y| y.a.total_cmp(&x.a).then(x.b.cmp(&y.b)));
        let mut taus: Vec<f64> = records.iter().map(|r| r.a).collect();
        taus.dedup();
        Self { records, taus }
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `S(τ) = {b : a > τ}`, sorted.
    pub fn splits_above(&self, tau: f64) -> Vec<usize> {
        let mut v: Vec<usize> = self.records.iter().filter(|r| r.a > tau).map(|r| r.b).collect();
        v.sort_unstable();
        v
    }

    /// The nested family `S_1 ⊂ ... ⊂ S_m`, `S_i = {b : a >= taus[i-1]}`.
    pub fn levels(&self) -> Vec<Vec<usize>> {
        let mut levels = Vec::with_capacity(self.taus.len());
        let mut current: Vec<usize> = Vec::new();
        let mut k = 0;
        for &tau in &self.taus {
            while k < self.records.len() && self.records[k].a >= tau {
                current.push(self.records[k].b);
                k += 1;
            }
            let mut level = current.clone();
            level.sort_unstable();
            levels.push(level);
        }
        levels
    }

    /// Splits a fixed-threshold run would keep: records whose statistic and
    /// every ancestor's statistic exceed `τ`.
    pub fn fixed_tau_splits(&self, tau: f64) -> Vec<usize> {
        let by_b: std::collections::HashMap<usize, &DetectionRecord> =
            self.records.iter().map(|r| (r.b, r)).collect();
        let mut out: Vec<usize> = self
            .records
            .iter()
            .filter(|r| {
                let mut cur = Some(**r);
                while let Some(rec) = cur {
                    if !(rec.a > tau) {
                        return false;
                    }
                    cur = rec.parent.and_then(|p| by_b.get(&p).map(|x| **x));
                }
                true
            })
            .map(|r| r.b)
            .collect();
        out.sort_unstable();
        out
    }
}

/// Change points implied by a list of splits.
pub fn splits_to_change_points(splits: &[usize]) -> ChangePointSet {
    splits.iter().map(|b| b + 1).collect()
}

enum Backend<'a> {
    Gram(KernelGram),
    Direct(DirectSums<'a>),
}

impl Backend<'_> {
    fn sums(&self) -> &dyn KernelSums {
        match self {
            Self::Gram(g) => g,
            Self::Direct(d) => d,
        }
    }
}

/// A sample prepared for detection: resolved bandwidth, kernel sums and the
/// interval collection.
pub struct Detector<'a> {
    backend: Backend<'a>,
    params: ResolvedParams,
    intervals: Vec<Interval>,
    len: usize,
}

impl<'a> Detector<'a> {
    pub fn new(sample: &'a Sample, cfg: &SegmenterConfig) -> Result<Self> {
        let params = cfg.resolve(sample.len(), sample.dim())?;
        let intervals = intervals_for(sample.len(), cfg, &params)?;
        Self::with_intervals(sample, cfg, params, intervals)
    }

    pub fn with_intervals(
        sample: &'a Sample,
        cfg: &SegmenterConfig,
        params: ResolvedParams,
        intervals: Vec<Interval>,
    ) -> Result<Self> {
        for iv in &intervals {
            iv.check_within(sample.len())?;
        }
        let spec = KernelSpec::new(cfg.kernel, sample.dim());
        let backend = match build_gram_with_budget(sample, params.h, &spec, u128::from(cfg.gram_budget)) {
            Ok(g) => Backend::Gram(g),
            Err(Error::CapacityExceeded { required, budget }) => {
                log::warn!(
                    "kernel gram needs {required} bytes (budget {budget}); evaluating on the fly"
                );
                Backend::Direct(DirectSums::new(sample, params.h, &spec)?)
            }
            Err(e) => return Err(e),
        };
        Ok(Self {
            backend,
            params,
            intervals,
            len: sample.len(),
        })
    }

    pub fn params(&self) -> &ResolvedParams {
        &self.params
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn uses_gram(&self) -> bool {
        matches!(self.backend, Backend::Gram(_))
    }

    pub fn sums(&self) -> &dyn KernelSums {
        self.backend.sums()
    }

    /// Candidate `(a_m, b_m)` for every interval; `None` where the
    /// intersection with `work` is too short to scan.
    pub fn candidates(&self, work: Interval) -> Vec<Option<(usize, f64)>> {
        let sums = self.backend.sums();
        let buffer = self.params.buffer;
        self.intervals
            .par_iter()
            .map(|iv| {
                let cut = work.intersect(iv)?;
                admits_scan(cut, buffer).then(|| best_split(sums, cut, buffer))
            })
            .collect()
    }

    /// `(b_{m*}, a_{m*})` on `work`, or `None` when no interval is admissible.
    pub fn best_in(&self, work: Interval) -> Option<(usize, f64)> {
        if !admits_scan(work, self.params.buffer) {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for cand in self.candidates(work).into_iter().flatten() {
            if best.is_none_or(|(_, a)| cand.1 > a) {
                best = Some(cand);
            }
        }
        best
    }

    fn recurse(&self, threshold: Option<f64>) -> Vec<DetectionRecord> {
        let mut out = Vec::new();
        let mut stack = vec![(Interval { s: 0, e: self.len }, 0usize, None)];
        while let Some((work, depth, parent)) = stack.pop() {
            let Some((b, a)) = self.best_in(work) else {
                continue;
            };
            if threshold.is_some_and(|tau| !(a > tau)) {
                continue;
            }
            out.push(DetectionRecord {
                b,
                a,
                interval: work,
                depth,
                parent,
            });
            if b + 1 < work.e {
                stack.push((Interval { s: b + 1, e: work.e }, depth + 1, Some(b)));
            }
            stack.push((Interval { s: work.s, e: b }, depth + 1, Some(b)));
        }
        out
    }

    /// Every split of the unthresholded recursion.
    pub fn path(&self) -> ThresholdPath {
        ThresholdPath::from_records(self.recurse(None))
    }

    /// Sorted splits kept at threshold `τ`.
    pub fn detect_splits(&self, tau: f64) -> Vec<usize> {
        let mut v: Vec<usize> = self.recurse(Some(tau)).iter().map(|r| r.b).collect();
        v.sort_unstable();
        v
    }

    /// Records kept at threshold `τ`, in recursion order.
    pub fn detect_records(&self, tau: f64) -> Vec<DetectionRecord> {
        self.recurse(Some(tau))
    }
}

/// Fixed-threshold detection; requires `cfg.tau`.
pub fn mnp_detect(sample: &Sample, cfg: &SegmenterConfig) -> Result<ChangePointSet> {
    let tau = cfg
        .tau
        .ok_or_else(|| Error::InvalidConfig("fixed-threshold detection needs tau".into()))?;
    let det = Detector::new(sample, cfg)?;
    Ok(splits_to_change_points(&det.detect_splits(tau)))
}

pub fn detection_path(sample: &Sample, cfg: &SegmenterConfig) -> Result<ThresholdPath> {
    Ok(Detector::new(sample, cfg)?.path())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_formula() {
        // Direct evaluation: 5 * (30 ln 300 / 300)^(1/20).
        let h = default_bandwidth(300, 20);
        assert!((h - 4.861_588_007_836_404).abs() < 1e-12, "{h}");
        let h = default_bandwidth(150, 10);
        assert!((h - 5.001_062_512_793_556).abs() < 1e-12, "{h}");
        // Base 30 ln T / T < 1 for large T: h increases to 5 as p grows.
        let mut prev = 0.0;
        for p in [1, 2, 5, 10, 50, 1000] {
            let h = default_bandwidth(10_000, p);
            assert!(h > prev && h < 5.0);
            prev = h;
        }
        assert!((default_bandwidth(10_000, 100_000) - 5.0).abs() < 1e-3);
    }

    #[test]
    fn buffer_values() {
        assert_eq!(buffer_len(4.86, 20), 1);
        assert_eq!(buffer_len(0.5, 3), 8);
        for p in [1, 3, 20] {
            assert_eq!(buffer_len(1.0, p), 1);
        }
        assert_eq!(buffer_len(1.0 / 3.0, 1), 3);
        assert_eq!(buffer_len(0.4, 1), 3);
    }

    #[test]
    fn intervals_are_reproducible_and_valid() {
        let draw = || {
            let mut r = rng::stream(7, Domain::Intervals, &[]);
            generate_intervals(10, 3, 1, None, &mut r).unwrap()
        };
        let a = draw();
        assert_eq!(a.len(), 3);
        assert_eq!(a, draw());
        for iv in a {
            assert!(iv.s < iv.e && iv.e <= 10);
        }
    }

    #[test]
    fn forced_full_interval() {
        let mut r = rng::stream(1, Domain::Intervals, &[]);
        let ivs = generate_intervals(12, 20, 12, None, &mut r).unwrap();
        assert!(ivs.iter().all(|iv| *iv == Interval { s: 0, e: 12 }));
        assert!(matches!(
            generate_intervals(12, 1, 12, Some(11), &mut r),
            Err(Error::Unsatisfiable(_))
        ));
        assert!(matches!(
            generate_intervals(12, 1, 13, None, &mut r),
            Err(Error::Unsatisfiable(_))
        ));
    }

    #[test]
    fn length_bounds_respected() {
        let mut r = rng::stream(3, Domain::Intervals, &[]);
        let ivs = generate_intervals(200, 500, 10, Some(40), &mut r).unwrap();
        assert!(ivs.iter().all(|iv| (10..=40).contains(&iv.len()) && iv.e <= 200));
    }

    #[test]
    fn config_validation() {
        let cfg = SegmenterConfig {
            intervals: 0,
            ..Default::default()
        };
        assert!(cfg.resolve(100, 2).is_err());
        let cfg = SegmenterConfig {
            bandwidth: Bandwidth::Fixed(0.5),
            min_interval_len: Some(10),
            ..Default::default()
        };
        // p = 3: buffer 8, floor 18.
        assert!(matches!(cfg.resolve(100, 3), Err(Error::InvalidConfig(_))));
        let p = SegmenterConfig::default().resolve(150, 10).unwrap();
        assert_eq!((p.buffer, p.min_interval_len), (1, 4));
    }

    fn record(b: usize, a: f64, parent: Option<usize>) -> DetectionRecord {
        DetectionRecord {
            b,
            a,
            interval: Interval { s: 0, e: 100 },
            depth: 0,
            parent,
        }
    }

    #[test]
    fn path_levels_and_thresholds() {
        let path = ThresholdPath::from_records(vec![
            record(50, 3.0, None),
            record(20, 1.0, Some(50)),
            record(80, 2.0, Some(50)),
            record(10, 1.5, Some(20)),
            record(90, 1.0, Some(80)),
        ]);
        assert_eq!(path.taus, vec![3.0, 2.0, 1.5, 1.0]);
        assert_eq!(
            path.levels(),
            vec![vec![50], vec![50, 80], vec![10, 50, 80], vec![10, 20, 50, 80, 90]]
        );
        assert!(path.splits_above(3.0).is_empty());
        assert_eq!(path.splits_above(f64::NEG_INFINITY).len(), 5);
        assert_eq!(path.splits_above(1.2), vec![10, 50, 80]);
        // 10 has a larger statistic than its parent 20; a fixed run at 1.2
        // stops at 20 and never reaches 10.
        assert_eq!(path.fixed_tau_splits(1.2), vec![50, 80]);
        assert_eq!(path.fixed_tau_splits(0.5), vec![10, 20, 50, 80, 90]);
    }
}
