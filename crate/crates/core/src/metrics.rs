// SPDX-License-Identifier: MIT OR Apache-2.0

//! Localization metrics: count error and one-sided Hausdorff distances.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::ChangePointSet;
use crate::error::{Error, Result};

/// A distance in time units on the extended integers.
///
/// Serialized as a JSON integer, or the strings `"inf"` / `"-inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Distance {
    NegInfinity,
    Finite(u64),
    Infinity,
}

impl Distance {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            Self::NegInfinity => f64::NEG_INFINITY,
            Self::Finite(d) => d as f64,
            Self::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegInfinity => f.write_str("-inf"),
            Self::Finite(d) => write!(f, "{d}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(d) => s.serialize_u64(*d),
            Self::Infinity => s.serialize_str("inf"),
            Self::NegInfinity => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Distance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Self::Finite(v)),
            Raw::Text(t) => match t.as_str() {
                "inf" | "Infinity" | "+inf" => Ok(Self::Infinity),
                "-inf" | "-Infinity" => Ok(Self::NegInfinity),
                other => Err(serde::de::Error::custom(format!("invalid distance '{other}'"))),
            },
        }
    }
}

/// `d(A | B) = max_{b in B} min_{a in A} |a - b|`.
///
/// An empty conditioning set `B` gives `-inf` (maximum over nothing);
/// otherwise an empty `A` gives `+inf`. Thus `d(Ĉ | C) = +inf` and
/// `d(C | Ĉ) = -inf` when the estimate `Ĉ` is empty.
pub fn hausdorff_one_sided(from_set: &ChangePointSet, to_set: &ChangePointSet) -> Distance {
    if to_set.is_empty() {
        return Distance::NegInfinity;
    }
    if from_set.is_empty() {
        return Distance::Infinity;
    }
    let pts = from_set.points();
    let worst = to_set
        .iter()
        .map(|&b| {
            // Nearest neighbour in the sorted set.
            let k = pts.partition_point(|&a| a < b);
            let right = pts.get(k).map(|&a| a.abs_diff(b));
            let left = k.checked_sub(1).map(|k| pts[k].abs_diff(b));
            left.into_iter().chain(right).min().expect("nonempty set")
        })
        .max()
        .expect("nonempty conditioning set");
    Distance::Finite(worst as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalResult {
    /// `|K̂ - K|`.
    pub count_error: usize,
    /// `d(Ĉ | C)`: worst distance from a true point to the estimate.
    pub d_est_given_true: Distance,
    /// `d(C | Ĉ)`: worst distance from an estimated point to the truth.
    pub d_true_given_est: Distance,
}

pub fn evaluate_run(estimated: &ChangePointSet, truth: &ChangePointSet) -> EvalResult {
    EvalResult {
        count_error: estimated.len().abs_diff(truth.len()),
        d_est_given_true: hausdorff_one_sided(estimated, truth),
        d_true_given_est: hausdorff_one_sided(truth, estimated),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub replicates: usize,
    pub mean_count_error: f64,
    pub median_d_est_given_true: Distance,
    pub median_d_true_given_est: Distance,
}

/// Lower median over the extended integers.
pub fn median(values: &[Distance]) -> Option<Distance> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort();
    Some(v[(v.len() - 1) / 2])
}

pub fn aggregate(results: &[EvalResult]) -> Result<Summary> {
    if results.is_empty() {
        return Err(Error::EmptyList);
    }
    let n = results.len();
    let est: Vec<Distance> = results.iter().map(|r| r.d_est_given_true).collect();
    let tru: Vec<Distance> = results.iter().map(|r| r.d_true_given_est).collect();
    Ok(Summary {
        replicates: n,
        mean_count_error: results.iter().map(|r| r.count_error as f64).sum::<f64>() / n as f64,
        median_d_est_given_true: median(&est).expect("nonempty"),
        median_d_true_given_est: median(&tru).expect("nonempty"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> ChangePointSet {
        ChangePointSet::from(v.to_vec())
    }

    #[test]
    fn identical_sets() {
        let c = set(&[101, 201]);
        let r = evaluate_run(&c, &c);
        assert_eq!(
            r,
            EvalResult {
                count_error: 0,
                d_est_given_true: Distance::Finite(0),
                d_true_given_est: Distance::Finite(0)
            }
        );
    }

    #[test]
    fn shifted_sets() {
        let (c, est) = (set(&[101, 201]), set(&[99, 205]));
        assert_eq!(hausdorff_one_sided(&est, &c), Distance::Finite(4));
        assert_eq!(hausdorff_one_sided(&c, &est), Distance::Finite(4));
    }

    #[test]
    fn empty_estimate_conventions() {
        let r = evaluate_run(&set(&[]), &set(&[101, 201]));
        assert_eq!(r.count_error, 2);
        assert_eq!(r.d_est_given_true, Distance::Infinity);
        assert_eq!(r.d_true_given_est, Distance::NegInfinity);
    }

    #[test]
    fn spurious_point() {
        let r = evaluate_run(&set(&[101, 150, 201]), &set(&[101, 201]));
        assert_eq!(r.count_error, 1);
        assert_eq!(r.d_est_given_true, Distance::Finite(0));
        assert_eq!(r.d_true_given_est, Distance::Finite(49));
    }

    #[test]
    fn aggregation() {
        let r = evaluate_run(&set(&[99, 205]), &set(&[101, 201]));
        assert_eq!(aggregate(&[r]).unwrap().median_d_est_given_true, Distance::Finite(4));
        let mk = |k, d| EvalResult {
            count_error: k,
            d_est_given_true: d,
            d_true_given_est: d,
        };
        let s = aggregate(&[
            mk(0, Distance::Finite(2)),
            mk(1, Distance::Infinity),
            mk(2, Distance::Finite(3)),
        ])
        .unwrap();
        assert_eq!(s.mean_count_error, 1.0);
        assert_eq!(s.median_d_est_given_true, Distance::Finite(3));
        assert_eq!(
            median(&[Distance::NegInfinity, Distance::Finite(5), Distance::Infinity, Distance::Finite(1)]),
            Some(Distance::Finite(1))
        );
        assert!(matches!(aggregate(&[]), Err(Error::EmptyList)));
    }

    fn symmetric_hausdorff(a: &[usize], b: &[usize]) -> usize {
        let one = |x: &[usize], y: &[usize]| {
            y.iter()
                .map(|&q| x.iter().map(|&p| p.abs_diff(q)).min().unwrap())
                .max()
                .unwrap()
        };
        one(a, b).max(one(b, a))
    }

    proptest! {
        #[test]
        fn one_sided_distances_compose_to_hausdorff(
            a in proptest::collection::vec(1usize..300, 1..8),
            b in proptest::collection::vec(1usize..300, 1..8),
            shift in 0usize..100,
        ) {
            let (sa, sb) = (set(&a), set(&b));
            let d1 = hausdorff_one_sided(&sa, &sb);
            let d2 = hausdorff_one_sided(&sb, &sa);
            prop_assert!(d1.is_finite() && d2.is_finite());
            let sym = symmetric_hausdorff(sa.points(), sb.points()) as u64;
            prop_assert_eq!(d1.max(d2), Distance::Finite(sym));
            prop_assert_eq!(d1 == Distance::Finite(0), sb.is_subset(&sa));

            let shifted = |s: &ChangePointSet| s.iter().map(|x| x + shift).collect::<ChangePointSet>();
            prop_assert_eq!(evaluate_run(&shifted(&sa), &shifted(&sb)), evaluate_run(&sa, &sb));
        }
    }
}
