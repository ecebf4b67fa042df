//! Parameter sweeps over smoothing configurations and Pareto-front extraction
//! in the (clean accuracy, certified accuracy) plane.
//!
//! Every trial evaluates the dataset with the same random streams, so two
//! trials with equal configurations produce identical results. In particular
//! hierarchical trials with `p = 1` reproduce lower-level-only trials, and
//! hierarchical trials with the ablation lower level reproduce ablation-only
//! trials exactly.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{LowerLevel, SmoothingConfig};
use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::harness::{dataset_bounds, evaluate_bounds, BaseClassifier, CertifyParams};
use crate::threat::{inclusive_range, ThreatModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Row selection plus lower-level noise (optionally plus ablation trials).
    Hierarchical,
    /// Lower-level noise on every row (`p = 1`).
    LowerOnly,
    /// Selected rows ablated, nothing else.
    AblationOnly,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Hierarchical => "hierarchical",
            Method::LowerOnly => "lower_only",
            Method::AblationOnly => "ablation_only",
        }
    }

    pub fn all() -> [Method; 3] {
        [Method::Hierarchical, Method::LowerOnly, Method::AblationOnly]
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hierarchical" => Ok(Method::Hierarchical),
            "lower_only" | "lower-only" => Ok(Method::LowerOnly),
            "ablation_only" | "ablation-only" => Ok(Method::AblationOnly),
            _ => Err(Error::param(format!("unknown sweep method `{s}`"))),
        }
    }
}

/// Which lower-level family the noise trials use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerFamily {
    Gaussian,
    Sparse,
}

impl std::str::FromStr for LowerFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(LowerFamily::Gaussian),
            "sparse" => Ok(LowerFamily::Sparse),
            _ => Err(Error::param(format!("unknown lower-level family `{s}`"))),
        }
    }
}

/// A set of parameter values: explicit, or an inclusive span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamRange {
    Values { values: Vec<f64> },
    Span { min: f64, max: f64, step: f64 },
}

impl ParamRange {
    pub fn single(v: f64) -> Self {
        ParamRange::Values { values: vec![v] }
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        match self {
            ParamRange::Values { values } => Ok(values.clone()),
            ParamRange::Span { min, max, step } => inclusive_range(*min, *max, *step),
        }
    }

    fn bounds(&self) -> Result<Option<(f64, f64)>> {
        let g = self.grid()?;
        Ok(g.iter().copied().fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        }))
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Result<Option<f64>> {
        Ok(self.bounds()?.map(|(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    /// Cartesian product of the ranges.
    Grid,
    /// Independent uniform draws within each range's bounds.
    UniformRandom { n_trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub method: Method,
    pub family: LowerFamily,
    pub p: ParamRange,
    pub sigma: ParamRange,
    pub p_plus: ParamRange,
    pub p_minus: ParamRange,
    /// Hierarchical sweeps also try the ablation lower level at every `p`.
    pub include_ablation: bool,
    pub sampling: Sampling,
    pub threats: Vec<ThreatModel>,
    pub params: CertifyParams,
    /// Accuracies are averaged over this many independently seeded evaluations.
    pub repeats: usize,
    pub seed: u64,
}

/// One configuration to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub trial_id: usize,
    pub method: Method,
    pub config: SmoothingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_id: usize,
    pub method: Method,
    pub config: SmoothingConfig,
    pub clean_accuracy: f64,
    /// One entry per threat grid point.
    pub certified_accuracy: Vec<f64>,
}

fn check_probs(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(Error::param(format!("{name} value {v} outside [0, 1]"))),
        None => Ok(()),
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_probs("p", &self.p.grid()?)?;
        check_probs("p_plus", &self.p_plus.grid()?)?;
        check_probs("p_minus", &self.p_minus.grid()?)?;
        if let Some(s) = self.sigma.grid()?.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::param(format!("sigma value {s} must be positive")));
        }
        for t in &self.threats {
            t.validate()?;
        }
        self.params.validate()?;
        if self.repeats == 0 {
            return Err(Error::param("repeats must be at least 1"));
        }
        Ok(())
    }

    fn lower_grid(&self) -> Result<Vec<LowerLevel>> {
        Ok(match self.family {
            LowerFamily::Gaussian => self.sigma.grid()?.into_iter().map(|sigma| LowerLevel::Gaussian { sigma }).collect(),
            LowerFamily::Sparse => {
                let minus = self.p_minus.grid()?;
                self.p_plus
                    .grid()?
                    .into_iter()
                    .flat_map(|p_plus| minus.iter().map(move |&p_minus| LowerLevel::SparseFlip { p_plus, p_minus }))
                    .collect()
            }
        })
    }

    fn draw_lower<R: Rng>(&self, rng: &mut R) -> Result<Option<LowerLevel>> {
        Ok(match self.family {
            LowerFamily::Gaussian => self.sigma.draw(rng)?.map(|sigma| LowerLevel::Gaussian { sigma }),
            LowerFamily::Sparse => match (self.p_plus.draw(rng)?, self.p_minus.draw(rng)?) {
                (Some(p_plus), Some(p_minus)) => Some(LowerLevel::SparseFlip { p_plus, p_minus }),
                _ => None,
            },
        })
    }

    /// The trials of this sweep, numbered in a fixed order.
    pub fn trials(&self) -> Result<Vec<Trial>> {
        self.validate()?;
        let mut configs: Vec<SmoothingConfig> = Vec::new();
        match self.sampling {
            Sampling::Grid => {
                let ps = self.p.grid()?;
                let lowers = self.lower_grid()?;
                match self.method {
                    Method::Hierarchical => {
                        for &p in &ps {
                            for l in &lowers {
                                configs.push(SmoothingConfig::uniform(p, l.clone()));
                            }
                        }
                        if self.include_ablation {
                            configs.extend(ps.iter().map(|&p| SmoothingConfig::uniform(p, LowerLevel::Ablation)));
                        }
                    }
                    Method::LowerOnly => configs.extend(lowers.into_iter().map(|l| SmoothingConfig::uniform(1.0, l))),
                    Method::AblationOnly => {
                        configs.extend(ps.iter().map(|&p| SmoothingConfig::uniform(p, LowerLevel::Ablation)))
                    }
                }
            }
            Sampling::UniformRandom { n_trials, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut ablation_ps = Vec::new();
                for _ in 0..n_trials {
                    let p = self.p.draw(&mut rng)?;
                    let lower = self.draw_lower(&mut rng)?;
                    match (self.method, p, lower) {
                        (Method::Hierarchical, Some(p), Some(l)) => {
                            configs.push(SmoothingConfig::uniform(p, l));
                            ablation_ps.push(p);
                        }
                        (Method::LowerOnly, _, Some(l)) => configs.push(SmoothingConfig::uniform(1.0, l)),
                        (Method::AblationOnly, Some(p), _) => {
                            configs.push(SmoothingConfig::uniform(p, LowerLevel::Ablation))
                        }
                        _ => {}
                    }
                }
                if self.method == Method::Hierarchical && self.include_ablation {
                    configs.extend(ablation_ps.into_iter().map(|p| SmoothingConfig::uniform(p, LowerLevel::Ablation)));
                }
            }
        }
        Ok(configs
            .into_iter()
            .enumerate()
            .map(|(trial_id, config)| Trial { trial_id, method: self.method, config })
            .collect())
    }

    fn repeat_seed(&self, k: usize) -> u64 {
        if k == 0 {
            self.seed
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(k as u64);
            rng.random()
        }
    }
}

/// Evaluate one trial, averaging over repeats.
pub fn run_trial(
    spec: &SweepSpec,
    trial: &Trial,
    classifier: &dyn BaseClassifier,
    samples: &[Sample],
) -> Result<TrialResult> {
    let mut clean = 0.0;
    let mut cert = vec![0.0; spec.threats.len()];
    for k in 0..spec.repeats {
        let bounds = dataset_bounds(classifier, samples, &trial.config, &spec.params, spec.repeat_seed(k))?;
        let ev = evaluate_bounds(samples, &bounds, &trial.config, &spec.threats)?;
        clean += ev.clean_accuracy;
        for (acc, v) in cert.iter_mut().zip(&ev.certified_accuracy) {
            *acc += v;
        }
    }
    let n = spec.repeats as f64;
    Ok(TrialResult {
        trial_id: trial.trial_id,
        method: trial.method,
        config: trial.config.clone(),
        clean_accuracy: clean / n,
        certified_accuracy: cert.into_iter().map(|c| c / n).collect(),
    })
}

/// Run every trial not already in `completed`, calling `on_complete` as each
/// finishes. Returns all results (old and new) sorted by trial id.
pub fn run_sweep_resumable<F>(
    spec: &SweepSpec,
    classifier: &dyn BaseClassifier,
    samples: &[Sample],
    completed: &BTreeMap<usize, TrialResult>,
    on_complete: F,
) -> Result<Vec<TrialResult>>
where
    F: Fn(&TrialResult) -> Result<()> + Sync,
{
    let trials = spec.trials()?;
    for (id, done) in completed {
        match trials.get(*id) {
            Some(t) if t.config == done.config && t.method == done.method => {}
            _ => return Err(Error::param(format!("completed trial {id} does not belong to this sweep"))),
        }
    }
    let fresh: Vec<TrialResult> = trials
        .par_iter()
        .filter(|t| !completed.contains_key(&t.trial_id))
        .map(|t| {
            let r = run_trial(spec, t, classifier, samples)?;
            on_complete(&r)?;
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let mut all: Vec<TrialResult> = completed.values().cloned().chain(fresh).collect();
    all.sort_by_key(|r| r.trial_id);
    Ok(all)
}

pub fn run_sweep(spec: &SweepSpec, classifier: &dyn BaseClassifier, samples: &[Sample]) -> Result<Vec<TrialResult>> {
    run_sweep_resumable(spec, classifier, samples, &BTreeMap::new(), |_| Ok(()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub trial_id: usize,
    pub method: Method,
    pub config: SmoothingConfig,
    pub clean_accuracy: f64,
    pub certified_accuracy: f64,
    pub dominated: bool,
}

/// Points of every trial at threat grid index `k`.
pub fn points_at(results: &[TrialResult], k: usize) -> Vec<ParetoPoint> {
    results
        .iter()
        .map(|r| ParetoPoint {
            trial_id: r.trial_id,
            method: r.method,
            config: r.config.clone(),
            clean_accuracy: r.clean_accuracy,
            certified_accuracy: r.certified_accuracy[k],
            dominated: false,
        })
        .collect()
}

fn dominates(a: &ParetoPoint, b: &ParetoPoint) -> bool {
    a.clean_accuracy >= b.clean_accuracy
        && a.certified_accuracy >= b.certified_accuracy
        && (a.clean_accuracy > b.clean_accuracy || a.certified_accuracy > b.certified_accuracy)
}

/// All points with their `dominated` flag set, ordered by clean accuracy
/// descending (then certified accuracy descending, then input order).
pub fn mark_dominated(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut out: Vec<ParetoPoint> = points
        .iter()
        .map(|p| ParetoPoint { dominated: points.iter().any(|q| dominates(q, p)), ..p.clone() })
        .collect();
    out.sort_by(|a, b| {
        b.clean_accuracy
            .total_cmp(&a.clean_accuracy)
            .then(b.certified_accuracy.total_cmp(&a.certified_accuracy))
    });
    out
}

/// The non-dominated points. Ties are all kept.
pub fn pareto_front(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    mark_dominated(points).into_iter().filter(|p| !p.dominated).collect()
}

/// Whether every point of `b` is matched or beaten in both coordinates by
/// some point of `a`.
pub fn weakly_dominates(a: &[ParetoPoint], b: &[ParetoPoint]) -> bool {
    b.iter().all(|q| {
        a.iter().any(|p| p.clean_accuracy >= q.clean_accuracy && p.certified_accuracy >= q.certified_accuracy)
    })
}
