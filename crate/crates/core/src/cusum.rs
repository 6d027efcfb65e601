// SPDX-License-Identifier: MIT OR Apache-2.0

//! The kernel CUSUM statistic.
//!
//! For `0 <= s < t < e <= T` and a point `x`,
//!
//! ```text
//! Y(s, t, e; x) = sqrt((t-s)(e-t)/(e-s)) * (f̂_{s+1..t}(x) - f̂_{t+1..e}(x))
//! ```
//!
//! and the scanned statistic is `max_{i=1..T} |Y(s, t, e; X(i))|`, evaluated
//! at every observation of the sample, including those outside `(s, e]`.

use serde::{Deserialize, Serialize};

use crate::data::Interval;
use crate::error::{Error, Result};
use crate::kernel::KernelSums;

/// Statistic values over the scanned split range of one interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CusumProfile {
    pub interval: Interval,
    /// `(t, Y_t)` for every scanned `t`, in increasing `t`.
    pub values: Vec<(usize, f64)>,
    /// Smallest `t` attaining the maximum.
    pub argmax_t: usize,
    pub max_value: f64,
}

/// Factors `(scale / (t-s), scale / (e-t))` applied to the two window sums.
#[derive(Clone, Copy, Debug)]
struct SplitWeights {
    scale: f64,
    inv_left: f64,
    inv_right: f64,
}

impl SplitWeights {
    #[inline]
    fn new(s: usize, t: usize, e: usize) -> Self {
        let (nl, nr, n) = ((t - s) as f64, (e - t) as f64, (e - s) as f64);
        Self {
            scale: (nl * nr / n).sqrt(),
            inv_left: 1.0 / nl,
            inv_right: 1.0 / nr,
        }
    }

    #[inline]
    fn apply(&self, left: f64, right: f64) -> f64 {
        self.scale * (left * self.inv_left - right * self.inv_right)
    }

    #[inline]
    fn max_abs(&self, left: &[f64], right: &[f64]) -> f64 {
        left.iter()
            .zip(right)
            .map(|(&l, &r)| self.apply(l, r).abs())
            .fold(0.0, f64::max)
    }
}

fn check_triplet<K: KernelSums + ?Sized>(src: &K, s: usize, t: usize, e: usize) -> Result<()> {
    if !(s < t && t < e && e <= src.len()) {
        return Err(Error::IndexOutOfRange(format!(
            "need 0 <= s < t < e <= {}; got s={s}, t={t}, e={e}",
            src.len()
        )));
    }
    Ok(())
}

/// Weights `w_j`, `j = s+1..=e`, with `Y(s, t, e; x) = sum_j w_j K_h(x - X(j))`.
///
/// `w_j = sqrt((e-t) / ((e-s)(t-s)))` for `j <= t` and
/// `-sqrt((t-s) / ((e-s)(e-t)))` for `j > t`.
pub fn cusum_weights(s: usize, t: usize, e: usize) -> Result<Vec<f64>> {
    if !(s < t && t < e) {
        return Err(Error::IndexOutOfRange(format!(
            "need s < t < e; got s={s}, t={t}, e={e}"
        )));
    }
    let (nl, nr, n) = ((t - s) as f64, (e - t) as f64, (e - s) as f64);
    let wl = (nr / (n * nl)).sqrt();
    let wr = -(nl / (n * nr)).sqrt();
    Ok((s + 1..=e).map(|j| if j <= t { wl } else { wr }).collect())
}

/// `Y(s, t, e; X(i))` with `i` 1-based.
pub fn cusum_at<K: KernelSums + ?Sized>(
    src: &K,
    s: usize,
    t: usize,
    e: usize,
    i: usize,
) -> Result<f64> {
    check_triplet(src, s, t, e)?;
    if i == 0 || i > src.len() {
        return Err(Error::IndexOutOfRange(format!(
            "data point {i} not in 1..={}",
            src.len()
        )));
    }
    let w = SplitWeights::new(s, t, e);
    Ok(w.apply(src.window_sum(i - 1, s, t), src.window_sum(i - 1, t, e)))
}

/// `max_{i=1..T} |Y(s, t, e; X(i))|`.
pub fn cusum_stat<K: KernelSums + ?Sized>(src: &K, s: usize, t: usize, e: usize) -> Result<f64> {
    check_triplet(src, s, t, e)?;
    let n = src.len();
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    src.split_sums(s, t, e, &mut left, &mut right);
    Ok(SplitWeights::new(s, t, e).max_abs(&left, &right))
}

/// Whether `(s, e)` admits a scan with the given buffer: `e - s > 2 buffer + 1`.
#[inline]
pub fn admits_scan(iv: Interval, buffer: usize) -> bool {
    iv.len() > 2 * buffer + 1
}

/// Statistic for every `t` in `[s + buffer, e - buffer]`.
pub fn cusum_profile<K: KernelSums + ?Sized>(
    src: &K,
    iv: Interval,
    buffer: usize,
) -> Result<CusumProfile> {
    if buffer == 0 {
        return Err(Error::InvalidConfig("buffer must be >= 1".into()));
    }
    if iv.e > src.len() || iv.s >= iv.e {
        return Err(Error::IndexOutOfRange(format!(
            "interval ({}, {}) not within 0 <= s < e <= {}",
            iv.s,
            iv.e,
            src.len()
        )));
    }
    if !admits_scan(iv, buffer) {
        return Err(Error::IntervalTooShort {
            s: iv.s,
            e: iv.e,
            buffer,
        });
    }
    let (lo, hi) = (iv.s + buffer, iv.e - buffer);
    let mut values = Vec::with_capacity(hi - lo + 1);
    src.scan(iv.s, iv.e, lo, hi, &mut |t, left, right| {
        values.push((t, SplitWeights::new(iv.s, t, iv.e).max_abs(left, right)));
    });
    let (argmax_t, max_value) = values
        .iter()
        .copied()
        .fold((lo, f64::NEG_INFINITY), |best, (t, v)| if v > best.1 { (t, v) } else { best });
    Ok(CusumProfile {
        interval: iv,
        values,
        argmax_t,
        max_value,
    })
}

/// Argmax and maximum of the profile without materializing it.
pub(crate) fn best_split<K: KernelSums + ?Sized>(
    src: &K,
    iv: Interval,
    buffer: usize,
) -> (usize, f64) {
    let (lo, hi) = (iv.s + buffer, iv.e - buffer);
    let mut best = (lo, f64::NEG_INFINITY);
    src.scan(iv.s, iv.e, lo, hi, &mut |t, left, right| {
        let v = SplitWeights::new(iv.s, t, iv.e).max_abs(left, right);
        if v > best.1 {
            best = (t, v);
        }
    });
    best
}
