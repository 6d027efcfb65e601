// SPDX-License-Identifier: MIT OR Apache-2.0

//! Samples, intervals, detection records and change-point sets.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `T x p` matrix of finite observations stored row-major by time.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    len: usize,
    dim: usize,
}

impl Sample {
    /// Validates a rectangular row list.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let len = rows.len();
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        if len == 0 || dim == 0 {
            return Err(Error::EmptyInput);
        }
        let mut values = Vec::with_capacity(len * dim);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Ragged {
                    row: r + 1,
                    found: row.len(),
                    expected: dim,
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(values, len, dim)
    }

    /// Validates a row-major buffer of `len * dim` values.
    pub fn from_flat(values: Vec<f64>, len: usize, dim: usize) -> Result<Self> {
        if len == 0 || dim == 0 {
            return Err(Error::EmptyInput);
        }
        if values.len() != len * dim {
            return Err(Error::DimensionMismatch {
                expected: len * dim,
                found: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry {
                row: k / dim + 1,
                col: k % dim + 1,
            });
        }
        Ok(Self { values, len, dim })
    }

    /// Number of time points `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row `t`, 1-based.
    pub fn row(&self, t: usize) -> &[f64] {
        assert!(t >= 1 && t <= self.len, "row {t} out of 1..={}", self.len);
        self.row0(t - 1)
    }

    #[inline]
    pub(crate) fn row0(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Reads CSV with one row per time point. A first row that does not parse
    /// as numbers is treated as a header.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (k, record) in rdr.records().enumerate() {
            let record = record?;
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if k == 0 => continue,
                Err(e) => {
                    return Err(Error::Parse {
                        line: k + 1,
                        msg: e.to_string(),
                    })
                }
            }
        }
        Self::from_rows(&rows)
    }

    pub fn read_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Writes headerless CSV using the shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().from_writer(writer);
        for row in self.rows() {
            wtr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Half-open time window `(s, e]`, covering rows `s+1..=e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub s: usize,
    pub e: usize,
}

impl Interval {
    pub fn new(s: usize, e: usize) -> Result<Self> {
        if s >= e {
            return Err(Error::EmptySegment { s, e });
        }
        Ok(Self { s, e })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.e - self.s
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.e <= self.s
    }

    /// `[s, e] ∩ [other.s, other.e]`, `None` when disjoint or degenerate.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let s = self.s.max(other.s);
        let e = self.e.min(other.e);
        (s < e).then_some(Interval { s, e })
    }

    pub(crate) fn check_within(&self, len: usize) -> Result<()> {
        if self.s >= self.e || self.e > len {
            return Err(Error::IndexOutOfRange(format!(
                "interval ({}, {}) not within 0 <= s < e <= {len}",
                self.s, self.e
            )));
        }
        Ok(())
    }
}

/// Sorted, duplicate-free change-point locations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct ChangePointSet(Vec<usize>);

impl ChangePointSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn points(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn insert(&mut self, x: usize) {
        if let Err(pos) = self.0.binary_search(&x) {
            self.0.insert(pos, x);
        }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &ChangePointSet) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }
}

impl From<Vec<usize>> for ChangePointSet {
    fn from(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl From<ChangePointSet> for Vec<usize> {
    fn from(c: ChangePointSet) -> Self {
        c.0
    }
}

impl FromIterator<usize> for ChangePointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().collect::<Vec<_>>().into()
    }
}

impl<'a> IntoIterator for &'a ChangePointSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// One accepted split of the recursive detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    /// Split location: the left segment ends at row `b`.
    pub b: usize,
    /// Maximal CUSUM statistic attained at `b`.
    pub a: f64,
    /// Working interval the split was searched in.
    pub interval: Interval,
    /// Recursion depth, 0 for the whole sample.
    pub depth: usize,
    /// Split of the enclosing recursion step, if any.
    pub parent: Option<usize>,
}

impl DetectionRecord {
    /// Change point implied by the split (first row after it).
    pub fn change_point(&self) -> usize {
        self.b + 1
    }
}
