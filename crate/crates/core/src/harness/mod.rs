//! Monte-Carlo certification of single inputs and whole datasets.

pub mod classifiers;
pub mod synthetic;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificates::{certify_ball, delta_for};
use crate::config::{LowerLevel, SmoothingConfig};
use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::matrix::{ExtendedMatrix, FeatureMatrix};
use crate::record::{CertificateRecord, Prediction, Verdict};
use crate::sampling::{sample_under_noise, RngStream};
use crate::stats::{clopper_pearson_lower, clopper_pearson_upper, ConfidenceSpec};
use crate::threat::ThreatModel;

pub use classifiers::{build_classifier, builtin_classifiers};
pub use synthetic::{make_synthetic_dataset, SyntheticData, SyntheticSpec};

/// A base classifier evaluated on smoothed inputs. Implementations must be
/// deterministic functions of `z` and callable from several threads at once.
pub trait BaseClassifier: Send + Sync {
    fn n_classes(&self) -> usize;

    fn classify(&self, z: &ExtendedMatrix) -> std::result::Result<usize, String>;

    /// Registry name that rebuilds this classifier.
    fn spec(&self) -> String {
        "custom".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Certify `p_A > 1/2` with the full `alpha` on one lower bound.
    Binary,
    /// Certify `p_A > p_B` with `alpha / 2` on each of two bounds.
    MultiClass,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Mode::Binary),
            "multiclass" | "multi_class" | "multi-class" => Ok(Mode::MultiClass),
            _ => Err(Error::param(format!("unknown mode `{s}`"))),
        }
    }
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Binary => "binary",
            Mode::MultiClass => "multiclass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyParams {
    pub n0: u64,
    pub n1: u64,
    pub alpha: f64,
    pub mode: Mode,
}

impl Default for CertifyParams {
    fn default() -> Self {
        Self { n0: 1000, n1: 10_000, alpha: 0.01, mode: Mode::Binary }
    }
}

impl CertifyParams {
    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 || self.n1 == 0 {
            return Err(Error::param("n0 and n1 must be positive"));
        }
        ConfidenceSpec::new(self.alpha, 1)?;
        Ok(())
    }

    pub fn confidence(&self) -> ConfidenceSpec {
        let n_bounds = match self.mode {
            Mode::Binary => 1,
            Mode::MultiClass => 2,
        };
        ConfidenceSpec { alpha: self.alpha, n_bounds }
    }
}

/// Vote-probability bounds from the certification counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteBounds {
    pub top: usize,
    pub runner_up: Option<usize>,
    pub p_lower: f64,
    pub p_upper_runner: Option<f64>,
}

/// Selection phase on `counts0`, confidence bounds on `counts1`.
pub fn estimate_bounds(
    classifier: &dyn BaseClassifier,
    x: &FeatureMatrix,
    config: &SmoothingConfig,
    params: &CertifyParams,
    stream: RngStream,
) -> Result<VoteBounds> {
    params.validate()?;
    // Disjoint substreams keep the two phases independent.
    let counts0 = sample_under_noise(classifier, x, config, params.n0, stream.substream(0))?;
    let counts1 = sample_under_noise(classifier, x, config, params.n1, stream.substream(1))?;
    let (top, runner) = counts0.top_two();
    let level = params.confidence().per_bound();
    let p_lower = clopper_pearson_lower(counts1.counts[top], counts1.n, level)?;
    let p_upper_runner = match params.mode {
        Mode::Binary => None,
        Mode::MultiClass => Some(match runner {
            Some(b) => clopper_pearson_upper(counts1.counts[b], counts1.n, level)?,
            None => 0.0,
        }),
    };
    Ok(VoteBounds { top, runner_up: runner, p_lower, p_upper_runner })
}

/// Turn vote bounds into a record. The prediction abstains when the test
/// fails even without any perturbation; otherwise each grid point gets its own
/// verdict.
pub fn certify_from_bounds(
    sample_id: &str,
    bounds: &VoteBounds,
    config: &SmoothingConfig,
    threats: &[ThreatModel],
) -> Result<CertificateRecord> {
    let r_max = threats.iter().map(ThreatModel::r).max().unwrap_or(0);
    let delta = delta_for(&config.selection, r_max)?.delta;
    let clean_pass = match bounds.p_upper_runner {
        None => bounds.p_lower > 0.5,
        Some(u) => bounds.p_lower > u,
    };
    let mut verdicts = Vec::with_capacity(threats.len());
    for t in threats {
        let ball = certify_ball(bounds.p_lower, bounds.p_upper_runner, config, t)?;
        verdicts.push(Verdict { threat: *t, delta: ball.delta.delta, certified: clean_pass && ball.certified });
    }
    let predicted = if clean_pass { Prediction::Class(bounds.top) } else { Prediction::Abstain };
    let max_epsilon = match (&config.lower, bounds.p_upper_runner, clean_pass) {
        (LowerLevel::Gaussian { sigma }, None, true) => {
            let d = delta_for(&config.selection, r_max)?;
            Some(crate::certificates::hier_gaussian_max_radius(bounds.p_lower, *sigma, d)?)
        }
        _ => None,
    };
    Ok(CertificateRecord {
        sample_id: sample_id.to_string(),
        label: None,
        predicted,
        p_lower: bounds.p_lower,
        p_upper_runner: bounds.p_upper_runner,
        delta,
        verdicts,
        max_epsilon,
    })
}

fn check_inputs(x: &FeatureMatrix, config: &SmoothingConfig, threats: &[ThreatModel]) -> Result<()> {
    config.check_domain(x.domain(), x.n_rows())?;
    for t in threats {
        t.check_matrix(x)?;
        config.check_threat(t)?;
    }
    Ok(())
}

/// Certify one input against every point of a threat grid. The same counts
/// serve every grid point.
pub fn certify_input(
    classifier: &dyn BaseClassifier,
    sample_id: &str,
    x: &FeatureMatrix,
    config: &SmoothingConfig,
    threats: &[ThreatModel],
    params: &CertifyParams,
    stream: RngStream,
) -> Result<CertificateRecord> {
    check_inputs(x, config, threats)?;
    let bounds = estimate_bounds(classifier, x, config, params, stream)?;
    certify_from_bounds(sample_id, &bounds, config, threats)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Fraction of samples with a non-abstaining, correct prediction.
    pub clean_accuracy: f64,
    /// Per grid point: fraction correct and certified.
    pub certified_accuracy: Vec<f64>,
    /// Sorted by sample id.
    pub records: Vec<CertificateRecord>,
}

/// Vote bounds for every sample; sample `i` draws from stream `(seed, i)`.
pub fn dataset_bounds(
    classifier: &dyn BaseClassifier,
    samples: &[Sample],
    config: &SmoothingConfig,
    params: &CertifyParams,
    seed: u64,
) -> Result<Vec<VoteBounds>> {
    samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            config.check_domain(s.x.domain(), s.x.n_rows())?;
            estimate_bounds(classifier, &s.x, config, params, RngStream::new(seed, i as u64))
        })
        .collect()
}

/// Summarize per-sample bounds into accuracies and records.
pub fn evaluate_bounds(
    samples: &[Sample],
    bounds: &[VoteBounds],
    config: &SmoothingConfig,
    threats: &[ThreatModel],
) -> Result<Evaluation> {
    if samples.is_empty() {
        return Err(Error::param("cannot evaluate an empty dataset"));
    }
    let mut records = Vec::with_capacity(samples.len());
    for (s, b) in samples.iter().zip(bounds) {
        check_inputs(&s.x, config, threats)?;
        let mut rec = certify_from_bounds(&s.id, b, config, threats)?;
        rec.label = Some(s.label);
        records.push(rec);
    }
    let n = samples.len() as f64;
    let clean = records.iter().filter(|r| r.is_correct()).count() as f64 / n;
    let certified = (0..threats.len())
        .map(|k| records.iter().filter(|r| r.is_correct() && r.verdicts[k].certified).count() as f64 / n)
        .collect();
    records.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    Ok(Evaluation { clean_accuracy: clean, certified_accuracy: certified, records })
}

/// Certify every sample. Abstentions count as incorrect.
pub fn evaluate_dataset(
    classifier: &dyn BaseClassifier,
    samples: &[Sample],
    config: &SmoothingConfig,
    threats: &[ThreatModel],
    params: &CertifyParams,
    seed: u64,
) -> Result<Evaluation> {
    if samples.is_empty() {
        return Err(Error::param("cannot evaluate an empty dataset"));
    }
    for s in samples {
        check_inputs(&s.x, config, threats)?;
    }
    let bounds = dataset_bounds(classifier, samples, config, params, seed)?;
    evaluate_bounds(samples, &bounds, config, threats)
}

#[cfg(test)]
mod tests {
    use super::classifiers::{Coin, Constant};
    use super::*;
    use crate::certificates::{hier_gaussian_lower, DeltaValue};
    use crate::matrix::Domain;
    use crate::threat::continuous_grid;

    fn real(n: usize) -> FeatureMatrix {
        FeatureMatrix::zeros(n, 2, Domain::Real).unwrap()
    }

    #[test]
    fn constant_classifier_bound() {
        let cfg = SmoothingConfig::uniform(0.95, LowerLevel::Gaussian { sigma: 1.0 });
        let params = CertifyParams { n0: 100, n1: 1000, ..Default::default() };
        let threats = continuous_grid(&[1, 2], &[0.5, 100.0]);
        let rec = certify_input(&Constant::new(1, 2), "s", &real(3), &cfg, &threats, &params, RngStream::new(0, 0)).unwrap();
        assert_eq!(rec.predicted, Prediction::Class(1));
        assert_eq!(rec.p_lower, clopper_pearson_lower(1000, 1000, 0.01).unwrap());
        assert!((rec.delta - (1.0 - 0.95f64.powi(2))).abs() < 1e-15);
        // p_lower < 1, so the Gaussian bound decays with epsilon.
        let cert: Vec<bool> = rec.verdicts.iter().map(|v| v.certified).collect();
        assert_eq!(cert, vec![true, false, true, false]);
        assert!(matches!(rec.max_epsilon, Some(crate::record::Radius::Finite(r)) if r > 0.5 && r < 100.0));
    }

    #[test]
    fn coin_classifier_certifies() {
        let cfg = SmoothingConfig::uniform(1.0, LowerLevel::Gaussian { sigma: 1.0 });
        let threats = [ThreatModel::ContinuousL2 { r: 1, epsilon: 1.0 }];
        let rec = certify_input(&Coin::binary(0.999, 0).unwrap(), "s", &real(1), &cfg, &threats, &CertifyParams::default(), RngStream::new(5, 0)).unwrap();
        assert_eq!(rec.predicted, Prediction::Class(1));
        assert!(rec.verdicts[0].certified);
        let bound = hier_gaussian_lower(rec.p_lower, 1.0, 1.0, DeltaValue::zero()).unwrap();
        assert!(bound > 0.5);
    }

    #[test]
    fn no_selection_never_certifies() {
        let cfg = SmoothingConfig::uniform(0.0, LowerLevel::Gaussian { sigma: 1.0 });
        let threats = continuous_grid(&[1, 2], &[0.0, 0.1]);
        let params = CertifyParams { n0: 50, n1: 200, ..Default::default() };
        let rec = certify_input(&Constant::new(0, 2), "s", &real(2), &cfg, &threats, &params, RngStream::new(0, 0)).unwrap();
        assert!(rec.verdicts.iter().all(|v| !v.certified));
        assert_eq!(rec.delta, 1.0);
    }

    #[test]
    fn abstains_on_even_split() {
        let cfg = SmoothingConfig::uniform(1.0, LowerLevel::Gaussian { sigma: 1.0 });
        let threats = continuous_grid(&[1], &[0.0]);
        let params = CertifyParams { n0: 100, n1: 1000, ..Default::default() };
        let rec = certify_input(&Coin::binary(0.5, 1).unwrap(), "s", &real(1), &cfg, &threats, &params, RngStream::new(0, 0)).unwrap();
        assert_eq!(rec.predicted, Prediction::Abstain);
        assert!(rec.verdicts.iter().all(|v| !v.certified));
        assert!(rec.max_epsilon.is_none());
    }

    #[test]
    fn multiclass_uses_split_alpha() {
        let cfg = SmoothingConfig::uniform(0.9, LowerLevel::Ablation);
        let threats = [ThreatModel::ContinuousL2 { r: 1, epsilon: 1.0 }];
        let params = CertifyParams { n0: 100, n1: 1000, alpha: 0.01, mode: Mode::MultiClass };
        let rec = certify_input(&Constant::new(2, 3), "s", &real(2), &cfg, &threats, &params, RngStream::new(0, 0)).unwrap();
        assert_eq!(rec.p_lower, clopper_pearson_lower(1000, 1000, 0.005).unwrap());
        assert_eq!(rec.p_upper_runner, Some(clopper_pearson_upper(0, 1000, 0.005).unwrap()));
        assert!(rec.verdicts[0].certified);
    }

    #[test]
    fn incompatible_inputs_rejected() {
        let cfg = SmoothingConfig::uniform(0.9, LowerLevel::Gaussian { sigma: 1.0 });
        let params = CertifyParams { n0: 10, n1: 10, ..Default::default() };
        let bad_r = [ThreatModel::ContinuousL2 { r: 5, epsilon: 1.0 }];
        assert!(certify_input(&Constant::new(0, 2), "s", &real(2), &cfg, &bad_r, &params, RngStream::new(0, 0)).is_err());
        let flip = [ThreatModel::DiscreteFlip { r: 1, r_a: 1, r_d: 1 }];
        assert!(certify_input(&Constant::new(0, 2), "s", &real(2), &cfg, &flip, &params, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn dataset_accuracy() {
        let samples: Vec<Sample> =
            (0..6).map(|i| Sample { id: format!("s{i}"), label: 1, x: real(2) }).collect();
        let cfg = SmoothingConfig::uniform(0.9, LowerLevel::Gaussian { sigma: 1.0 });
        let threats = continuous_grid(&[1, 2], &[0.1, 1.0]);
        let params = CertifyParams { n0: 50, n1: 500, ..Default::default() };
        let ev = evaluate_dataset(&Constant::new(1, 2), &samples, &cfg, &threats, &params, 3).unwrap();
        assert_eq!(ev.clean_accuracy, 1.0);
        for (k, a) in ev.certified_accuracy.iter().enumerate() {
            assert!(*a <= ev.clean_accuracy);
            assert_eq!(*a, if ev.records[0].verdicts[k].certified { 1.0 } else { 0.0 });
        }
        assert!(evaluate_dataset(&Constant::new(1, 2), &[], &cfg, &threats, &params, 3).is_err());
        let wrong = evaluate_dataset(&Constant::new(0, 2), &samples, &cfg, &threats, &params, 3).unwrap();
        assert_eq!(wrong.clean_accuracy, 0.0);
        assert!(wrong.certified_accuracy.iter().all(|a| *a == 0.0));
    }
}
