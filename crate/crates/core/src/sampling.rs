//! Drawing from the hierarchical smoothing distribution: Bernoulli row
//! selection followed by lower-level noise on the selected rows only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::config::{LowerLevel, Selection, SmoothingConfig};
use crate::error::{Error, Result};
use crate::harness::BaseClassifier;
use crate::matrix::{extend, Domain, ExtendedMatrix, FeatureMatrix};
use crate::record::VoteCounts;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A reproducible random stream. Substreams are derived by hashing the
/// parent stream id with a counter, so draws never depend on scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn substream(&self, k: u64) -> Self {
        let id = splitmix64(splitmix64(self.stream_id) ^ k.wrapping_mul(0xd605_bbb5_8c8a_bd0d));
        Self { seed: self.seed, stream_id: id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Draw the row-selection indicator.
pub fn sample_tau<R: Rng + ?Sized>(n: usize, selection: &Selection, rng: &mut R) -> Result<Vec<u8>> {
    match selection {
        Selection::Uniform { p } => Ok((0..n).map(|_| u8::from(rng.random::<f64>() < *p)).collect()),
        Selection::PerRow { ps } => {
            if ps.len() != n {
                return Err(Error::dim(format!("{} selection probabilities for {n} rows", ps.len())));
            }
            Ok(ps.iter().map(|p| u8::from(rng.random::<f64>() < *p)).collect())
        }
    }
}

/// Apply the lower-level distribution to the rows selected by `tau`.
pub fn apply_lower_noise<R: Rng + ?Sized>(
    x: &FeatureMatrix,
    tau: Vec<u8>,
    lower: &LowerLevel,
    rng: &mut R,
) -> Result<ExtendedMatrix> {
    if !lower.supports(x.domain()) {
        return Err(Error::incompatible(format!(
            "{} lower level on {} data",
            lower.name(),
            x.domain().as_str()
        )));
    }
    if tau.len() != x.n_rows() {
        return Err(Error::dim(format!("indicator has length {} for {} rows", tau.len(), x.n_rows())));
    }
    let d = x.n_cols();
    let mut values = x.values().to_vec();
    let selected = |i: usize| tau[i] == 1;
    match *lower {
        LowerLevel::Gaussian { sigma } => {
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::param(e.to_string()))?;
            for i in (0..x.n_rows()).filter(|&i| selected(i)) {
                for v in &mut values[i * d..(i + 1) * d] {
                    *v += normal.sample(rng);
                }
            }
            let w = FeatureMatrix::new(x.n_rows(), d, Domain::Real, values)?;
            extend(w, tau)
        }
        LowerLevel::SparseFlip { p_plus, p_minus } => {
            for i in (0..x.n_rows()).filter(|&i| selected(i)) {
                for v in &mut values[i * d..(i + 1) * d] {
                    let u: f64 = rng.random();
                    let flip = if *v == 0.0 { u < p_plus } else { u < p_minus };
                    if flip {
                        *v = 1.0 - *v;
                    }
                }
            }
            let w = FeatureMatrix::new(x.n_rows(), d, Domain::Binary, values)?;
            extend(w, tau)
        }
        LowerLevel::Ablation => {
            let ablated: Vec<bool> = (0..x.n_rows()).map(selected).collect();
            for i in (0..x.n_rows()).filter(|&i| ablated[i]) {
                values[i * d..(i + 1) * d].fill(0.0);
            }
            let w = FeatureMatrix::new(x.n_rows(), d, x.domain(), values)?;
            extend(w, tau)?.with_ablation(ablated)
        }
    }
}

/// One draw `Z ~ Psi_X`.
pub fn sample_extended<R: Rng + ?Sized>(x: &FeatureMatrix, config: &SmoothingConfig, rng: &mut R) -> Result<ExtendedMatrix> {
    let tau = sample_tau(x.n_rows(), &config.selection, rng)?;
    apply_lower_noise(x, tau, &config.lower, rng)
}

/// Classify `n` independent draws from `Psi_X` and tally the votes. Draw `k`
/// uses `stream.substream(k)`, so the counts do not depend on the number of
/// worker threads.
pub fn sample_under_noise(
    classifier: &dyn BaseClassifier,
    x: &FeatureMatrix,
    config: &SmoothingConfig,
    n: u64,
    stream: RngStream,
) -> Result<VoteCounts> {
    if n == 0 {
        return Err(Error::param("need at least one smoothing draw"));
    }
    config.check_domain(x.domain(), x.n_rows())?;
    let n_classes = classifier.n_classes();
    let counts = (0..n)
        .into_par_iter()
        .try_fold(
            || VoteCounts::zeros(n_classes),
            |mut acc, k| {
                let mut rng = stream.substream(k).rng();
                let z = sample_extended(x, config, &mut rng)?;
                let class = classifier
                    .classify(&z)
                    .map_err(|message| Error::Classifier { index: k, message })?;
                if class >= n_classes {
                    return Err(Error::Classifier {
                        index: k,
                        message: format!("class {class} out of range for {n_classes} classes"),
                    });
                }
                acc.record(class);
                Ok(acc)
            },
        )
        .try_reduce(|| VoteCounts::zeros(n_classes), |a, b| Ok(a.merge(&b)))?;
    Ok(counts)
}
