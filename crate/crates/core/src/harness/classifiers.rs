//! Built-in base classifiers and a name-based registry.

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::matrix::{ExtendedMatrix, FeatureMatrix};
use crate::config::SmoothingConfig;
use crate::config::Selection;

use super::BaseClassifier;

/// Always votes for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    class: usize,
    n_classes: usize,
}

impl Constant {
    pub fn new(class: usize, n_classes: usize) -> Self {
        assert!(class < n_classes, "class {class} out of range for {n_classes} classes");
        Self { class, n_classes }
    }
}

impl BaseClassifier for Constant {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn classify(&self, _z: &ExtendedMatrix) -> std::result::Result<usize, String> {
        Ok(self.class)
    }

    fn spec(&self) -> String {
        format!("constant:{}:{}", self.class, self.n_classes)
    }
}

/// Parity of the number of selected rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorParity;

impl BaseClassifier for IndicatorParity {
    fn n_classes(&self) -> usize {
        2
    }

    fn classify(&self, z: &ExtendedMatrix) -> std::result::Result<usize, String> {
        Ok(z.indicator().iter().map(|&t| usize::from(t)).sum::<usize>() % 2)
    }

    fn spec(&self) -> String {
        "parity".into()
    }
}

/// Class 1 iff the sum of all feature values reaches `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowSumThreshold {
    pub threshold: f64,
}

impl BaseClassifier for RowSumThreshold {
    fn n_classes(&self) -> usize {
        2
    }

    fn classify(&self, z: &ExtendedMatrix) -> std::result::Result<usize, String> {
        Ok(usize::from(z.base().values().iter().sum::<f64>() >= self.threshold))
    }

    fn spec(&self) -> String {
        format!("rowsum:{}", self.threshold)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Votes at random with fixed class probabilities. The randomness is a hash
/// of the input, so the classifier is a deterministic function of `z`; under
/// continuous noise distinct draws give independent votes.
#[derive(Debug, Clone, PartialEq)]
pub struct Coin {
    cumulative: Vec<f64>,
    probs: Vec<f64>,
    salt: u64,
}

impl Coin {
    pub fn new(probs: Vec<f64>, salt: u64) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::param(format!("coin probabilities {probs:?} must lie in [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("coin probabilities sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { cumulative, probs, salt })
    }

    /// Two classes, voting for class 1 with probability `q`.
    pub fn binary(q: f64, salt: u64) -> Result<Self> {
        Self::new(vec![1.0 - q, q], salt)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Uniform draw in `[0, 1)` determined by `z`.
    fn uniform(&self, z: &ExtendedMatrix) -> f64 {
        let h = z.serialize().iter().fold(splitmix64(self.salt), |h, v| splitmix64(h ^ v.to_bits()));
        (h >> 11) as f64 / (1u64 << 53) as f64
    }

    fn class_of(&self, u: f64) -> usize {
        self.cumulative.iter().position(|c| u < *c).unwrap_or(self.cumulative.len() - 1)
    }

    /// Exact smoothed vote probability of `class` under a continuous lower
    /// level. Draws with at least one selected row are almost surely distinct
    /// and vote independently; the draw with no row selected is the fixed
    /// input `X|0` and votes deterministically.
    pub fn exact_vote_probability(&self, x: &FeatureMatrix, config: &SmoothingConfig, class: usize) -> Result<f64> {
        if !matches!(config.lower, crate::config::LowerLevel::Gaussian { .. }) {
            return Err(Error::incompatible("exact coin vote probability needs a continuous lower level"));
        }
        let none_selected: f64 = match &config.selection {
            Selection::Uniform { p } => (1.0 - p).powi(x.n_rows() as i32),
            Selection::PerRow { ps } => ps.iter().map(|p| 1.0 - p).product(),
        };
        let fixed = crate::matrix::extend(x.clone(), vec![0; x.n_rows()])?;
        let fixed_vote = f64::from(u8::from(self.class_of(self.uniform(&fixed)) == class));
        Ok(self.probs[class] * (1.0 - none_selected) + none_selected * fixed_vote)
    }
}

impl BaseClassifier for Coin {
    fn n_classes(&self) -> usize {
        self.probs.len()
    }

    fn classify(&self, z: &ExtendedMatrix) -> std::result::Result<usize, String> {
        Ok(self.class_of(self.uniform(z)))
    }

    fn spec(&self) -> String {
        let ps: Vec<String> = self.probs.iter().map(|p| p.to_string()).collect();
        if self.salt == 0 {
            format!("coin:{}", ps.join(","))
        } else {
            format!("coin:{}@{}", ps.join(","), self.salt)
        }
    }
}

/// Nearest class centroid over per-row feature sums.
///
/// The plain variant treats every row alike. The extended variant reads the
/// indicator column: rows that were selected for noise are down-weighted by
/// `selected_weight`, and ablated rows are dropped from the distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroid {
    centroids: Vec<Vec<f64>>,
    selected_weight: Option<f64>,
}

fn row_sums(x: &FeatureMatrix) -> Vec<f64> {
    (0..x.n_rows()).map(|i| x.row(i).iter().sum()).collect()
}

impl Centroid {
    fn fit(train: &[Sample], selected_weight: Option<f64>) -> Result<Self> {
        let first = train.first().ok_or_else(|| Error::param("centroid classifier needs training samples"))?;
        let n_rows = first.x.n_rows();
        let n_classes = crate::dataset::n_classes(train);
        let mut sums = vec![vec![0.0; n_rows]; n_classes];
        let mut counts = vec![0usize; n_classes];
        for s in train {
            if s.x.n_rows() != n_rows {
                return Err(Error::dim("training samples differ in row count"));
            }
            for (acc, v) in sums[s.label].iter_mut().zip(row_sums(&s.x)) {
                *acc += v;
            }
            counts[s.label] += 1;
        }
        let centroids = sums
            .into_iter()
            .zip(&counts)
            .map(|(s, &c)| {
                if c == 0 {
                    vec![f64::NAN; n_rows]
                } else {
                    s.into_iter().map(|v| v / c as f64).collect()
                }
            })
            .collect();
        Ok(Self { centroids, selected_weight })
    }

    pub fn fit_plain(train: &[Sample]) -> Result<Self> {
        Self::fit(train, None)
    }

    pub fn fit_extended(train: &[Sample], selected_weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&selected_weight) {
            return Err(Error::param(format!("selected-row weight {selected_weight} outside [0, 1]")));
        }
        Self::fit(train, Some(selected_weight))
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }
}

impl BaseClassifier for Centroid {
    fn n_classes(&self) -> usize {
        self.centroids.len()
    }

    fn classify(&self, z: &ExtendedMatrix) -> std::result::Result<usize, String> {
        let sums = row_sums(z.base());
        if sums.len() != self.centroids[0].len() {
            return Err(format!("input has {} rows, centroids have {}", sums.len(), self.centroids[0].len()));
        }
        let weight = |i: usize| match self.selected_weight {
            None => 1.0,
            Some(_) if z.is_ablated(i) => 0.0,
            Some(w) if z.indicator()[i] == 1 => w,
            Some(_) => 1.0,
        };
        let mut best = (0usize, f64::INFINITY);
        for (c, centroid) in self.centroids.iter().enumerate() {
            if centroid[0].is_nan() {
                continue;
            }
            let dist: f64 = sums.iter().zip(centroid).enumerate().map(|(i, (s, m))| weight(i) * (s - m).powi(2)).sum();
            if dist < best.1 {
                best = (c, dist);
            }
        }
        Ok(best.0)
    }

    fn spec(&self) -> String {
        match self.selected_weight {
            None => "centroid-plain".into(),
            Some(w) => format!("centroid-extended:{w}"),
        }
    }
}

pub const DEFAULT_SELECTED_WEIGHT: f64 = 0.25;

/// Names understood by [`build_classifier`].
pub fn builtin_classifiers() -> Vec<(&'static str, &'static str)> {
    vec![
        ("constant:<class>[:<n_classes>]", "always the given class"),
        ("parity", "parity of the number of selected rows"),
        ("rowsum:<threshold>", "class 1 iff the feature sum reaches the threshold"),
        ("coin:<p0>,<p1>,...[@<salt>]", "hash-seeded random votes with the given class probabilities"),
        ("centroid-plain", "nearest centroid of per-row sums; needs training data"),
        ("centroid-extended[:<weight>]", "centroid using the indicator column; needs training data"),
    ]
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::param(format!("cannot parse {what} `{s}`")))
}

/// Instantiate a classifier from its registry name. Centroid classifiers are
/// fitted on `train`.
pub fn build_classifier(spec: &str, train: Option<&[Sample]>) -> Result<Box<dyn BaseClassifier>> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (spec.trim(), None),
    };
    let need_train = || train.ok_or_else(|| Error::param(format!("classifier `{name}` needs training data")));
    Ok(match (name, arg) {
        ("constant", Some(a)) => {
            let (class, n) = match a.split_once(':') {
                Some((c, n)) => (c, Some(n)),
                None => (a, None),
            };
            let class: usize = class.parse().map_err(|_| Error::param(format!("bad class `{class}`")))?;
            let n: usize = match n {
                Some(n) => n.parse().map_err(|_| Error::param(format!("bad class count `{n}`")))?,
                None => (class + 1).max(2),
            };
            if class >= n {
                return Err(Error::param(format!("class {class} out of range for {n} classes")));
            }
            Box::new(Constant::new(class, n))
        }
        ("parity", None) => Box::new(IndicatorParity),
        ("rowsum", Some(a)) => Box::new(RowSumThreshold { threshold: parse_f64(a, "threshold")? }),
        ("coin", Some(a)) => {
            let (ps, salt) = match a.split_once('@') {
                Some((ps, s)) => (ps, s.parse().map_err(|_| Error::param(format!("bad salt `{s}`")))?),
                None => (a, 0),
            };
            let probs = ps.split(',').map(|p| parse_f64(p, "probability")).collect::<Result<Vec<_>>>()?;
            Box::new(Coin::new(probs, salt)?)
        }
        ("centroid-plain", None) => Box::new(Centroid::fit_plain(need_train()?)?),
        ("centroid-extended", a) => {
            let w = a.map(|a| parse_f64(a, "weight")).transpose()?.unwrap_or(DEFAULT_SELECTED_WEIGHT);
            Box::new(Centroid::fit_extended(need_train()?, w)?)
        }
        _ => return Err(Error::param(format!("unknown classifier `{spec}`"))),
    })
}
