//! Threat models: how many rows an adversary controls and how far it may move them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{flip_counts, row_distance, Domain, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThreatModel {
    /// Up to `r` rows changed, Frobenius norm of the change at most `epsilon`.
    ContinuousL2 { r: usize, epsilon: f64 },
    /// Up to `r` rows changed with at most `r_a` insertions (0 -> 1) and
    /// `r_d` deletions (1 -> 0) in total.
    DiscreteFlip { r: usize, r_a: usize, r_d: usize },
}

impl ThreatModel {
    pub fn r(&self) -> usize {
        match *self {
            ThreatModel::ContinuousL2 { r, .. } | ThreatModel::DiscreteFlip { r, .. } => r,
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            ThreatModel::ContinuousL2 { .. } => Domain::Real,
            ThreatModel::DiscreteFlip { .. } => Domain::Binary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ThreatModel::ContinuousL2 { epsilon, .. } = *self {
            if !(epsilon >= 0.0 && epsilon.is_finite()) {
                return Err(Error::param(format!("epsilon must be finite and >= 0, got {epsilon}")));
            }
        }
        Ok(())
    }

    /// Check that this threat model can be applied to `x`.
    pub fn check_matrix(&self, x: &FeatureMatrix) -> Result<()> {
        self.validate()?;
        if self.r() > x.n_rows() {
            return Err(Error::param(format!(
                "row budget r={} exceeds the {} rows of the input",
                self.r(),
                x.n_rows()
            )));
        }
        if self.domain() != x.domain() {
            return Err(Error::incompatible(format!(
                "{} threat model on a {} matrix",
                self.kind(),
                x.domain().as_str()
            )));
        }
        Ok(())
    }

    /// Whether `x_tilde` lies in the ball around `x`.
    pub fn contains(&self, x: &FeatureMatrix, x_tilde: &FeatureMatrix) -> Result<bool> {
        let dist = row_distance(x, x_tilde)?;
        if dist.changed_rows.len() > self.r() {
            return Ok(false);
        }
        match *self {
            ThreatModel::ContinuousL2 { epsilon, .. } => Ok(dist.l2 <= epsilon),
            ThreatModel::DiscreteFlip { r_a, r_d, .. } => {
                let (add, del) = flip_counts(x, x_tilde)?;
                Ok(add <= r_a && del <= r_d)
            }
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ThreatModel::ContinuousL2 { .. } => "l2",
            ThreatModel::DiscreteFlip { .. } => "flip",
        }
    }
}

impl fmt::Display for ThreatModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ThreatModel::ContinuousL2 { r, epsilon } => write!(f, "r={r};eps={epsilon}"),
            ThreatModel::DiscreteFlip { r, r_a, r_d } => write!(f, "r={r};ra={r_a};rd={r_d}"),
        }
    }
}

/// `start, start + step, ...` up to and including `stop`.
pub fn inclusive_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::param("range bounds must be finite"));
    }
    if stop < start {
        return Err(Error::param(format!("empty range {start}..={stop}")));
    }
    if start == stop {
        return Ok(vec![start]);
    }
    if step <= 0.0 {
        return Err(Error::param(format!("range step must be positive, got {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Integer counterpart of [`inclusive_range`].
pub fn inclusive_range_usize(start: usize, stop: usize, step: usize) -> Result<Vec<usize>> {
    if stop < start {
        return Err(Error::param(format!("empty range {start}..={stop}")));
    }
    if step == 0 {
        return Ok(vec![start]);
    }
    Ok((start..=stop).step_by(step).collect())
}

/// Cartesian product of row budgets and magnitudes.
pub fn continuous_grid(rs: &[usize], epsilons: &[f64]) -> Vec<ThreatModel> {
    rs.iter()
        .flat_map(|&r| epsilons.iter().map(move |&epsilon| ThreatModel::ContinuousL2 { r, epsilon }))
        .collect()
}

pub fn discrete_grid(rs: &[usize], r_as: &[usize], r_ds: &[usize]) -> Vec<ThreatModel> {
    let mut out = Vec::with_capacity(rs.len() * r_as.len() * r_ds.len());
    for &r in rs {
        for &r_a in r_as {
            for &r_d in r_ds {
                out.push(ThreatModel::DiscreteFlip { r, r_a, r_d });
            }
        }
    }
    out
}
