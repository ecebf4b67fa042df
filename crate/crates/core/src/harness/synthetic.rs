//! Synthetic row-structured datasets.
//!
//! Each class has a prototype: a per-row bit density (binary) or per-cell mean
//! (real). A sample copies its class prototype with fresh noise, and each row is
//! independently replaced by class-free noise with probability
//! `corruption`. `class_separation` in `[0, 1]` scales how far prototypes sit
//! from the shared background; 0 makes classes indistinguishable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::matrix::{Domain, FeatureMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub domain: Domain,
    pub n_classes: usize,
    pub class_separation: f64,
    pub corruption: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_train: 200,
            n_test: 100,
            n_rows: 6,
            n_cols: 4,
            domain: Domain::Binary,
            n_classes: 2,
            class_separation: 0.6,
            corruption: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::param("synthetic matrices need at least one row and column"));
        }
        if self.n_classes < 2 {
            return Err(Error::param("synthetic data needs at least two classes"));
        }
        if !(0.0..=1.0).contains(&self.class_separation) || !(0.0..=1.0).contains(&self.corruption) {
            return Err(Error::param("class_separation and corruption must lie in [0, 1]"));
        }
        Ok(())
    }
}

enum Prototype {
    /// Per-row probability of a one.
    Binary(Vec<f64>),
    /// Per-cell mean.
    Real(Vec<f64>),
}

fn prototypes(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Vec<Prototype> {
    (0..spec.n_classes)
        .map(|_| match spec.domain {
            Domain::Binary => Prototype::Binary(
                (0..spec.n_rows)
                    .map(|_| 0.5 + 0.5 * spec.class_separation * rng.random_range(-1.0..=1.0))
                    .collect(),
            ),
            Domain::Real => Prototype::Real(
                (0..spec.n_rows * spec.n_cols)
                    .map(|_| 2.0 * spec.class_separation * Distribution::<f64>::sample(&StandardNormal, rng))
                    .collect::<Vec<f64>>(),
            ),
        })
        .collect()
}

fn draw(spec: &SyntheticSpec, proto: &Prototype, rng: &mut ChaCha8Rng) -> Result<FeatureMatrix> {
    let d = spec.n_cols;
    let mut values = Vec::with_capacity(spec.n_rows * d);
    for i in 0..spec.n_rows {
        let corrupted = rng.random::<f64>() < spec.corruption;
        for j in 0..d {
            let v = match proto {
                Prototype::Binary(q) => {
                    let q = if corrupted { 0.5 } else { q[i] };
                    f64::from(u8::from(rng.random::<f64>() < q))
                }
                Prototype::Real(mu) => {
                    let m = if corrupted { 0.0 } else { mu[i * d + j] };
                    m + Distribution::<f64>::sample(&StandardNormal, rng)
                }
            };
            values.push(v);
        }
    }
    FeatureMatrix::new(spec.n_rows, d, spec.domain, values)
}

/// Deterministic in `spec.seed`. Labels cycle through the classes.
pub fn make_synthetic_dataset(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let protos = prototypes(spec, &mut rng);
    let split = |prefix: &str, n: usize, stream: u64| -> Result<Vec<Sample>> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(stream);
        (0..n)
            .map(|k| {
                let label = k % spec.n_classes;
                Ok(Sample { id: format!("{prefix}{k:05}"), label, x: draw(spec, &protos[label], &mut rng)? })
            })
            .collect()
    };
    let train = split("train-", spec.n_train, 1)?;
    let test = split("test-", spec.n_test, 2)?;
    Ok(SyntheticData { train, test })
}
