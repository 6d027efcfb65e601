// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded generators for the five benchmark scenarios.
//!
//! Time is split into three equal blocks `A1 = 1..=T/3`, `A2`, `A3`. The law
//! changes on entering and on leaving `A2`, so the true change points are
//! `T/3 + 1` and `2T/3 + 1`.
//!
//! | id | `A1`, `A3`                 | `A2`                                        |
//! |----|----------------------------|---------------------------------------------|
//! | 1  | `N(0, I)`                  | `N(v, I)`, `v_j = 1` for `j <= p/2`         |
//! | 2  | `ε`                        | `0.1·1 + ε`, `√3 ε ~ t_3(I)`                |
//! | 3  | `N(0, I)`                  | `N(0, I/2 + 11ᵀ/2)`                         |
//! | 4  | `N(0, 1.25 I)`             | `½ N(0.5·1, I) + ½ N(-0.5·1, I)`            |
//! | 5  | coordinates iid `g1`       | `g1` for `j <= 2`, `g2` for `j >= 3`        |
//!
//! Scenario 5 uses `g1 = Uniform(0, 1)` and for `g2` an arcsine (Beta(½, ½))
//! law affinely rescaled to the same mean `1/2` and variance `1/12`:
//! `X = 1/2 + sqrt(2/3) (B - 1/2)` with `B ~ Beta(½, ½)`. Since
//! `Var B = 1/8`, `Var X = (2/3)(1/8) = 1/12`. `B` is drawn by inversion,
//! `B = sin²(πU/2)`.
//!
//! Every row `t` draws from its own stream keyed by `(scenario, t)`, so the
//! first rows of a longer sample coincide with a shorter one whenever the
//! block assignment agrees.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{ChangePointSet, Sample};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// `mean + L z` with `z` standard normal.
pub fn mvn_sample<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    chol_lower: &DMatrix<f64>,
    rng: &mut R,
) -> DVector<f64> {
    let z = DVector::from_fn(mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    mean + chol_lower * z
}

/// `L z / sqrt(w / df)` with `w ~ χ²(df)`; a centred multivariate t.
pub fn mvt_sample<R: Rng + ?Sized>(
    scale_chol: &DMatrix<f64>,
    df: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let chi = ChiSquared::new(df)
        .map_err(|e| Error::InvalidConfig(format!("degrees of freedom {df}: {e}")))?;
    let z = DVector::from_fn(scale_chol.nrows(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let w: f64 = chi.sample(rng);
    Ok(scale_chol * z / (w / df).sqrt())
}

/// Ground truth of a generated sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioTruth {
    pub scenario: u8,
    #[serde(rename = "T")]
    pub len: usize,
    pub p: usize,
    pub seed: u64,
    pub change_points: ChangePointSet,
}

/// `{T/3 + 1, 2T/3 + 1}`.
pub fn true_change_points(len: usize) -> ChangePointSet {
    ChangePointSet::from(vec![len / 3 + 1, 2 * len / 3 + 1])
}

/// Second scenario-5 density: arcsine law rescaled to mean 1/2, variance 1/12.
pub fn sample_g2<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let b = (FRAC_PI_2 * u).sin().powi(2);
    0.5 + (2.0f64 / 3.0).sqrt() * (b - 0.5)
}

struct Generator {
    id: u8,
    dim: usize,
    mean_shift: DVector<f64>,
    chol_a2: DMatrix<f64>,
}

impl Generator {
    fn new(id: u8, dim: usize) -> Result<Self> {
        let zeros = DVector::zeros(dim);
        let identity = DMatrix::identity(dim, dim);
        let (mean_shift, chol_a2) = match id {
            1 => (DVector::from_fn(dim, |j, _| if j < dim / 2 { 1.0 } else { 0.0 }), identity),
            2 => (DVector::from_element(dim, 0.1), identity),
            3 => {
                let cov = DMatrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { 0.5 });
                let l = cov
                    .cholesky()
                    .expect("I/2 + 11'/2 is positive definite")
                    .unpack();
                (zeros, l)
            }
            4 => (DVector::from_element(dim, 0.5), identity),
            5 => (zeros, identity),
            other => return Err(Error::UnknownScenario(other)),
        };
        Ok(Self {
            id,
            dim,
            mean_shift,
            chol_a2,
        })
    }

    fn row<R: Rng + ?Sized>(&self, in_a2: bool, rng: &mut R) -> Vec<f64> {
        let p = self.dim;
        let zero = DVector::zeros(p);
        let identity = DMatrix::identity(p, p);
        let v: DVector<f64> = match (self.id, in_a2) {
            (1, false) | (3, false) => mvn_sample(&zero, &identity, rng),
            (1, true) => mvn_sample(&self.mean_shift, &identity, rng),
            (2, _) => {
                let eps = mvt_sample(&identity, 3.0, rng).expect("df = 3 is valid") / 3f64.sqrt();
                if in_a2 {
                    &self.mean_shift + eps
                } else {
                    eps
                }
            }
            (3, true) => mvn_sample(&zero, &self.chol_a2, rng),
            (4, false) => mvn_sample(&zero, &(identity * 1.25f64.sqrt()), rng),
            (4, true) => {
                let heads = rng.random_bool(0.5);
                let mean = if heads {
                    self.mean_shift.clone()
                } else {
                    -&self.mean_shift
                };
                mvn_sample(&mean, &identity, rng)
            }
            (5, _) => DVector::from_fn(p, |j, _| {
                if in_a2 && j >= 2 {
                    sample_g2(rng)
                } else {
                    rng.random::<f64>()
                }
            }),
            _ => unreachable!("scenario id validated in Generator::new"),
        };
        v.iter().copied().collect()
    }
}

/// Generates scenario `id` with `len` rows in dimension `dim`.
pub fn gen_scenario(id: u8, len: usize, dim: usize, seed: u64) -> Result<(Sample, ScenarioTruth)> {
    if !(1..=5).contains(&id) {
        return Err(Error::UnknownScenario(id));
    }
    if len == 0 || !len.is_multiple_of(3) {
        return Err(Error::BadLength(len));
    }
    if dim < 2 {
        return Err(Error::BadDimension {
            scenario: id,
            reason: format!("p must be >= 2; got {dim}"),
        });
    }
    if id == 1 && !dim.is_multiple_of(2) {
        return Err(Error::BadDimension {
            scenario: id,
            reason: format!("p must be even; got {dim}"),
        });
    }
    let generator = Generator::new(id, dim)?;
    let (a2_start, a2_end) = (len / 3 + 1, 2 * len / 3);
    let mut values = Vec::with_capacity(len * dim);
    for t in 1..=len {
        let mut stream = rng::stream(seed, Domain::Scenario, &[u64::from(id), t as u64]);
        values.extend(generator.row((a2_start..=a2_end).contains(&t), &mut stream));
    }
    let sample = Sample::from_flat(values, len, dim)?;
    let truth = ScenarioTruth {
        scenario: id,
        len,
        p: dim,
        seed,
        change_points: true_change_points(len),
    };
    Ok((sample, truth))
}
