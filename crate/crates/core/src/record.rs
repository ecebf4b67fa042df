//! Vote tallies and certificate records.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::threat::ThreatModel;

/// Per-class vote counts from `n` smoothed draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteCounts {
    pub counts: Vec<u64>,
    pub n: u64,
}

impl VoteCounts {
    pub fn zeros(n_classes: usize) -> Self {
        Self { counts: vec![0; n_classes], n: 0 }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let n = counts.iter().sum();
        Self { counts, n }
    }

    pub fn record(&mut self, class: usize) {
        self.counts[class] += 1;
        self.n += 1;
    }

    pub fn merge(mut self, other: &VoteCounts) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n += other.n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let total: u64 = self.counts.iter().sum();
        if total != self.n {
            return Err(Error::domain(format!("votes sum to {total}, expected {}", self.n)));
        }
        Ok(())
    }

    /// Index of the largest count; ties go to the lowest index.
    pub fn top(&self) -> usize {
        self.top_two().0
    }

    /// The two largest counts, ties broken toward the lower index. The runner-up
    /// is `None` when there is a single class.
    pub fn top_two(&self) -> (usize, Option<usize>) {
        let mut order: Vec<usize> = (0..self.counts.len()).collect();
        order.sort_by(|&a, &b| self.counts[b].cmp(&self.counts[a]).then(a.cmp(&b)));
        (order[0], order.get(1).copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prediction {
    Class(usize),
    Abstain,
}

impl Prediction {
    pub fn class(self) -> Option<usize> {
        match self {
            Prediction::Class(c) => Some(c),
            Prediction::Abstain => None,
        }
    }

    pub fn is_abstain(self) -> bool {
        self == Prediction::Abstain
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prediction::Class(c) => write!(f, "{c}"),
            Prediction::Abstain => f.write_str("ABSTAIN"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PredictionRepr {
    Class(usize),
    Token(String),
}

impl Serialize for Prediction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Prediction::Class(c) => s.serialize_u64(c as u64),
            Prediction::Abstain => s.serialize_str("ABSTAIN"),
        }
    }
}

impl<'de> Deserialize<'de> for Prediction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match PredictionRepr::deserialize(d)? {
            PredictionRepr::Class(c) => Ok(Prediction::Class(c)),
            PredictionRepr::Token(t) if t == "ABSTAIN" => Ok(Prediction::Abstain),
            PredictionRepr::Token(t) => Err(serde::de::Error::custom(format!("bad prediction `{t}`"))),
        }
    }
}

/// A certified radius. Perfect vote bounds certify every radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Finite(f64),
    Unbounded,
}

impl Radius {
    pub fn from_f64(r: f64) -> Self {
        if r.is_infinite() {
            Radius::Unbounded
        } else {
            Radius::Finite(r)
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Radius::Finite(r) => r,
            Radius::Unbounded => f64::INFINITY,
        }
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(r) => write!(f, "{r}"),
            Radius::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RadiusRepr {
    Finite(f64),
    Token(String),
}

impl Serialize for Radius {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Radius::Finite(r) => s.serialize_f64(r),
            Radius::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RadiusRepr::deserialize(d)? {
            RadiusRepr::Finite(r) => Ok(Radius::Finite(r)),
            RadiusRepr::Token(t) if t == "unbounded" => Ok(Radius::Unbounded),
            RadiusRepr::Token(t) => Err(serde::de::Error::custom(format!("bad radius `{t}`"))),
        }
    }
}

/// Certification outcome at one threat-model grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub threat: ThreatModel,
    pub delta: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub sample_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    pub predicted: Prediction,
    /// Lower confidence bound on the majority-class vote probability.
    pub p_lower: f64,
    /// Upper confidence bound on the runner-up vote probability (multi-class mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_upper_runner: Option<f64>,
    /// Delta at the largest row budget on the threat grid.
    pub delta: f64,
    pub verdicts: Vec<Verdict>,
    /// Largest certifiable l2 magnitude at the largest row budget; Gaussian
    /// lower level in binary mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_epsilon: Option<Radius>,
}

impl CertificateRecord {
    pub fn is_correct(&self) -> bool {
        matches!((self.predicted, self.label), (Prediction::Class(c), Some(l)) if c == l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_two_breaks_ties_low() {
        let v = VoteCounts::from_counts(vec![3, 5, 5, 1]);
        assert_eq!(v.top_two(), (1, Some(2)));
        let v = VoteCounts::from_counts(vec![4, 4]);
        assert_eq!(v.top_two(), (0, Some(1)));
        let v = VoteCounts::from_counts(vec![7]);
        assert_eq!(v.top_two(), (0, None));
    }

    #[test]
    fn counts_must_sum_to_n() {
        let mut v = VoteCounts::zeros(2);
        v.record(1);
        v.record(1);
        assert!(v.validate().is_ok());
        v.n = 3;
        assert!(v.validate().is_err());
    }

    #[test]
    fn prediction_and_radius_serialize() {
        assert_eq!(serde_json::to_string(&Prediction::Abstain).unwrap(), "\"ABSTAIN\"");
        assert_eq!(serde_json::to_string(&Prediction::Class(2)).unwrap(), "2");
        let p: Prediction = serde_json::from_str("\"ABSTAIN\"").unwrap();
        assert_eq!(p, Prediction::Abstain);
        let r: Radius = serde_json::from_str("\"unbounded\"").unwrap();
        assert_eq!(r, Radius::Unbounded);
        assert_eq!(serde_json::to_string(&Radius::Finite(0.5)).unwrap(), "0.5");
    }
}
