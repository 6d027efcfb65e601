// SPDX-License-Identifier: MIT OR Apache-2.0

//! Radial kernels, segment kernel density estimates and the prefix-summed
//! kernel Gram matrix.
//!
//! All kernels are normalized to integrate to one over `R^p`:
//!
//! | family         | `k(u)`                                         |
//! |----------------|------------------------------------------------|
//! | `Gaussian`     | `(2π)^{-p/2} exp(-|u|²/2)`                     |
//! | `Epanechnikov` | `(p+2)/(2 V_p) (1 - |u|²)` on the unit ball    |
//! | `UniformBall`  | `1/V_p` on the unit ball                       |
//!
//! with `V_p = π^{p/2} / Γ(p/2 + 1)` the volume of the unit ball.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Interval, Sample};
use crate::error::{Error, Result};

/// Default memory budget for a [`KernelGram`]: 2 GiB.
pub const DEFAULT_GRAM_BUDGET: u64 = 2 << 30;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    #[default]
    Gaussian,
    Epanechnikov,
    #[serde(rename = "uniform")]
    UniformBall,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Epanechnikov => "epanechnikov",
            Self::UniformBall => "uniform",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "epanechnikov" => Ok(Self::Epanechnikov),
            "uniform" | "uniformball" | "uniform_ball" => Ok(Self::UniformBall),
            other => Err(Error::InvalidConfig(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// Volume of the unit ball in `R^p`.
pub fn unit_ball_volume(p: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_p = V_{p-2} * 2π / p.
    let mut v = if p.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut d = if p.is_multiple_of(2) { 2 } else { 3 };
    while d <= p {
        v *= 2.0 * PI / d as f64;
        d += 2;
    }
    v
}

/// A kernel family on `R^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub dim: usize,
    norm: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, dim: usize) -> Self {
        assert!(dim >= 1, "kernel dimension must be >= 1");
        let norm = match family {
            KernelFamily::Gaussian => (2.0 * PI).powf(-(dim as f64) / 2.0),
            KernelFamily::Epanechnikov => (dim as f64 + 2.0) / (2.0 * unit_ball_volume(dim)),
            KernelFamily::UniformBall => 1.0 / unit_ball_volume(dim),
        };
        Self { family, dim, norm }
    }

    pub fn gaussian(dim: usize) -> Self {
        Self::new(KernelFamily::Gaussian, dim)
    }

    /// `k(0)`, the maximum of the kernel.
    pub fn peak(&self) -> f64 {
        self.norm
    }

    /// Radial profile as a function of `|u|²`.
    #[inline]
    fn profile(&self, sq: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-0.5 * sq).exp(),
            KernelFamily::Epanechnikov => {
                if sq <= 1.0 {
                    1.0 - sq
                } else {
                    0.0
                }
            }
            KernelFamily::UniformBall => {
                if sq <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `k(u)`.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: u.len(),
            });
        }
        let sq: f64 = u.iter().map(|x| x * x).sum();
        Ok(self.norm * self.profile(sq))
    }

    /// The same kernel rescaled to bandwidth `h`: `x, y ↦ h^{-p} k((x - y)/h)`.
    pub fn scaled(&self, h: f64) -> ScaledKernel {
        ScaledKernel {
            spec: *self,
            inv_h2: 1.0 / (h * h),
            height: self.norm * h.powi(-(self.dim as i32)),
        }
    }
}

/// [`KernelSpec`] at a fixed bandwidth.
#[derive(Clone, Copy, Debug)]
pub struct ScaledKernel {
    spec: KernelSpec,
    inv_h2: f64,
    height: f64,
}

impl ScaledKernel {
    /// `h^{-p} k(0)`.
    pub fn height(&self) -> f64 {
        self.height
    }

    #[inline]
    pub fn pair(&self, x: &[f64], y: &[f64]) -> f64 {
        let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        self.height * self.spec.profile(sq * self.inv_h2)
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "bandwidth must be finite and > 0; got {h}"
        )));
    }
    Ok(())
}

/// Segment kernel density estimate `f̂_{s,e,h}(x)` over rows `s+1..=e`.
pub fn kde_evaluate(
    sample: &Sample,
    iv: Interval,
    h: f64,
    x: &[f64],
    spec: &KernelSpec,
) -> Result<f64> {
    check_bandwidth(h)?;
    if iv.e <= iv.s {
        return Err(Error::EmptySegment { s: iv.s, e: iv.e });
    }
    iv.check_within(sample.len())?;
    if x.len() != sample.dim() || spec.dim != sample.dim() {
        return Err(Error::DimensionMismatch {
            expected: sample.dim(),
            found: if x.len() != sample.dim() { x.len() } else { spec.dim },
        });
    }
    let k = spec.scaled(h);
    let sum: f64 = (iv.s..iv.e).map(|j| k.pair(x, sample.row0(j))).sum();
    Ok(sum / iv.len() as f64)
}

/// Sums of bandwidth-scaled kernel values `Σ_j h^{-p} k((X(i) - X(j))/h)`
/// over time windows, evaluated at every data point `X(i)`.
pub trait KernelSums: Sync {
    /// Number of data points `T`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dim(&self) -> usize;

    fn bandwidth(&self) -> f64;

    /// Window sum over rows `s+1..=e` at the 0-based data point `i`.
    fn window_sum(&self, i: usize, s: usize, e: usize) -> f64;

    /// Fills `left[i]` with the sum over `s+1..=t` and `right[i]` with the
    /// sum over `t+1..=e`, for every data point.
    fn split_sums(&self, s: usize, t: usize, e: usize, left: &mut [f64], right: &mut [f64]) {
        for i in 0..self.len() {
            left[i] = self.window_sum(i, s, t);
            right[i] = self.window_sum(i, t, e);
        }
    }

    /// Visits `split_sums` for every `t` in `lo..=hi`.
    fn scan(
        &self,
        s: usize,
        e: usize,
        lo: usize,
        hi: usize,
        visit: &mut dyn FnMut(usize, &[f64], &[f64]),
    ) {
        let n = self.len();
        let mut left = vec![0.0; n];
        let mut right = vec![0.0; n];
        for t in lo..=hi {
            self.split_sums(s, t, e, &mut left, &mut right);
            visit(t, &left, &right);
        }
    }
}

/// Precomputed prefix sums of the kernel Gram matrix.
///
/// `prefix(i, t) = Σ_{j=1..t} h^{-p} k((X(i) - X(j))/h)`, so every window sum
/// is a difference of two entries. Storage is indexed by time first: the
/// values for all data points at one `t` are contiguous.
#[derive(Clone, Debug)]
pub struct KernelGram {
    cum: Vec<f64>,
    len: usize,
    dim: usize,
    h: f64,
    spec: KernelSpec,
}

impl KernelGram {
    pub fn required_bytes(len: usize) -> u128 {
        (len as u128 + 1) * len as u128 * std::mem::size_of::<f64>() as u128
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// `prefix[i][t]` with `i` 1-based and `t` in `0..=T`.
    pub fn prefix(&self, i: usize, t: usize) -> f64 {
        assert!(i >= 1 && i <= self.len && t <= self.len);
        self.cum[t * self.len + i - 1]
    }

    /// Prefix values at time `t` for all data points.
    #[inline]
    pub fn column(&self, t: usize) -> &[f64] {
        &self.cum[t * self.len..(t + 1) * self.len]
    }
}

/// Builds the prefix-summed Gram under the default 2 GiB budget.
pub fn build_gram(sample: &Sample, h: f64, spec: &KernelSpec) -> Result<KernelGram> {
    build_gram_with_budget(sample, h, spec, u128::from(DEFAULT_GRAM_BUDGET))
}

pub fn build_gram_with_budget(
    sample: &Sample,
    h: f64,
    spec: &KernelSpec,
    budget_bytes: u128,
) -> Result<KernelGram> {
    check_bandwidth(h)?;
    if spec.dim != sample.dim() {
        return Err(Error::DimensionMismatch {
            expected: sample.dim(),
            found: spec.dim,
        });
    }
    let n = sample.len();
    let required = KernelGram::required_bytes(n);
    if required > budget_bytes {
        return Err(Error::CapacityExceeded {
            required,
            budget: budget_bytes,
        });
    }
    let k = spec.scaled(h);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = sample.row0(i);
            let values: Vec<f64> = (0..n).map(|j| k.pair(xi, sample.row0(j))).collect();
            pairwise_prefix(&values)
        })
        .collect();
    let mut cum = vec![0.0; (n + 1) * n];
    for (i, row) in rows.iter().enumerate() {
        for (t, v) in row.iter().enumerate() {
            cum[t * n + i] = *v;
        }
    }
    Ok(KernelGram {
        cum,
        len: n,
        dim: sample.dim(),
        h,
        spec: *spec,
    })
}

/// Prefix sums `out[t] = Σ_{j<t} values[j]` where each prefix is assembled
/// from pairwise-summed dyadic blocks (the binary decomposition of `t`).
fn pairwise_prefix(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    // levels[k][b] = pairwise sum of values[b*2^k .. (b+1)*2^k], full blocks only.
    let mut levels: Vec<Vec<f64>> = vec![values.to_vec()];
    while levels.last().is_some_and(|l| l.len() >= 2) {
        let prev = levels.last().unwrap();
        let next: Vec<f64> = prev.chunks_exact(2).map(|c| c[0] + c[1]).collect();
        levels.push(next);
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    for t in 1..=n {
        let mut acc = 0.0;
        let mut offset = 0usize;
        for k in (0..levels.len()).rev() {
            let width = 1usize << k;
            if t & width != 0 {
                acc += levels[k][offset >> k];
                offset += width;
            }
        }
        out.push(acc);
    }
    out
}

impl KernelSums for KernelGram {
    fn len(&self) -> usize {
        self.len
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn bandwidth(&self) -> f64 {
        self.h
    }

    #[inline]
    fn window_sum(&self, i: usize, s: usize, e: usize) -> f64 {
        self.cum[e * self.len + i] - self.cum[s * self.len + i]
    }

    fn split_sums(&self, s: usize, t: usize, e: usize, left: &mut [f64], right: &mut [f64]) {
        let (cs, ct, ce) = (self.column(s), self.column(t), self.column(e));
        for i in 0..self.len {
            left[i] = ct[i] - cs[i];
            right[i] = ce[i] - ct[i];
        }
    }
}

/// On-the-fly kernel sums for samples whose Gram exceeds the memory budget.
#[derive(Clone, Debug)]
pub struct DirectSums<'a> {
    sample: &'a Sample,
    kernel: ScaledKernel,
    h: f64,
}

impl<'a> DirectSums<'a> {
    pub fn new(sample: &'a Sample, h: f64, spec: &KernelSpec) -> Result<Self> {
        check_bandwidth(h)?;
        if spec.dim != sample.dim() {
            return Err(Error::DimensionMismatch {
                expected: sample.dim(),
                found: spec.dim,
            });
        }
        Ok(Self {
            sample,
            kernel: spec.scaled(h),
            h,
        })
    }

    #[inline]
    fn pair(&self, i: usize, j: usize) -> f64 {
        self.kernel.pair(self.sample.row0(i), self.sample.row0(j))
    }
}

impl KernelSums for DirectSums<'_> {
    fn len(&self) -> usize {
        self.sample.len()
    }

    fn dim(&self) -> usize {
        self.sample.dim()
    }

    fn bandwidth(&self) -> f64 {
        self.h
    }

    fn window_sum(&self, i: usize, s: usize, e: usize) -> f64 {
        (s..e).map(|j| self.pair(i, j)).sum()
    }

    fn scan(
        &self,
        s: usize,
        e: usize,
        lo: usize,
        hi: usize,
        visit: &mut dyn FnMut(usize, &[f64], &[f64]),
    ) {
        if lo > hi {
            return;
        }
        let n = self.len();
        let mut left: Vec<f64> = (0..n).map(|i| self.window_sum(i, s, lo)).collect();
        let mut right: Vec<f64> = (0..n).map(|i| self.window_sum(i, lo, e)).collect();
        visit(lo, &left, &right);
        for t in lo + 1..=hi {
            // Row t (1-based) moves from the right window to the left one.
            for i in 0..n {
                let v = self.pair(i, t - 1);
                left[i] += v;
                right[i] -= v;
            }
            visit(t, &left, &right);
        }
    }
}
