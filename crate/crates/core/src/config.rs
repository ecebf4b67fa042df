//! Hierarchical smoothing configuration: an upper-level row selection and a
//! lower-level noise distribution applied to selected rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Domain;
use crate::threat::ThreatModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Selection {
    /// Every row is selected independently with probability `p`.
    Uniform { p: f64 },
    /// Row `i` is selected with probability `ps[i]`.
    PerRow { ps: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerLevel {
    /// Isotropic additive Gaussian noise.
    Gaussian { sigma: f64 },
    /// Independent bit flips: `0 -> 1` with `p_plus`, `1 -> 0` with `p_minus`.
    SparseFlip { p_plus: f64, p_minus: f64 },
    /// Selected rows are replaced by the ablation token.
    Ablation,
}

impl LowerLevel {
    pub fn name(&self) -> &'static str {
        match self {
            LowerLevel::Gaussian { .. } => "gaussian",
            LowerLevel::SparseFlip { .. } => "sparse",
            LowerLevel::Ablation => "ablation",
        }
    }

    pub fn supports(&self, domain: Domain) -> bool {
        matches!(
            (self, domain),
            (LowerLevel::Gaussian { .. }, Domain::Real)
                | (LowerLevel::SparseFlip { .. }, Domain::Binary)
                | (LowerLevel::Ablation, _)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub selection: Selection,
    pub lower: LowerLevel,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must lie in [0, 1], got {p}")))
    }
}

impl SmoothingConfig {
    pub fn uniform(p: f64, lower: LowerLevel) -> Self {
        Self { selection: Selection::Uniform { p }, lower }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.selection {
            Selection::Uniform { p } => check_prob("selection probability p", *p)?,
            Selection::PerRow { ps } => {
                if ps.is_empty() {
                    return Err(Error::param("per-row selection needs at least one probability"));
                }
                for p in ps {
                    check_prob("per-row selection probability", *p)?;
                }
            }
        }
        match self.lower {
            LowerLevel::Gaussian { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::param(format!("sigma must be positive, got {sigma}")));
                }
            }
            LowerLevel::SparseFlip { p_plus, p_minus } => {
                check_prob("p_plus", p_plus)?;
                check_prob("p_minus", p_minus)?;
            }
            LowerLevel::Ablation => {}
        }
        Ok(())
    }

    /// Validate against the data the configuration will smooth.
    pub fn check_domain(&self, domain: Domain, n_rows: usize) -> Result<()> {
        self.validate()?;
        if !self.lower.supports(domain) {
            return Err(Error::incompatible(format!(
                "{} lower level on {} data",
                self.lower.name(),
                domain.as_str()
            )));
        }
        if let Selection::PerRow { ps } = &self.selection {
            if ps.len() != n_rows {
                return Err(Error::dim(format!(
                    "{} per-row selection probabilities for {n_rows} rows",
                    ps.len()
                )));
            }
        }
        Ok(())
    }

    /// Gaussian certificates need an l2 threat model, sparse-flip certificates
    /// a flip-count threat model; ablation certifies either.
    pub fn check_threat(&self, threat: &ThreatModel) -> Result<()> {
        let ok = matches!(
            (&self.lower, threat),
            (LowerLevel::Gaussian { .. }, ThreatModel::ContinuousL2 { .. })
                | (LowerLevel::SparseFlip { .. }, ThreatModel::DiscreteFlip { .. })
                | (LowerLevel::Ablation, _)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::incompatible(format!(
                "{} lower level cannot certify threat model {threat}",
                self.lower.name()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_rules() {
        let g = SmoothingConfig::uniform(0.8, LowerLevel::Gaussian { sigma: 0.5 });
        assert!(g.check_domain(Domain::Real, 3).is_ok());
        assert!(g.check_domain(Domain::Binary, 3).is_err());
        assert!(g.check_threat(&ThreatModel::ContinuousL2 { r: 1, epsilon: 0.1 }).is_ok());
        assert!(g.check_threat(&ThreatModel::DiscreteFlip { r: 1, r_a: 1, r_d: 0 }).is_err());

        let s = SmoothingConfig::uniform(0.8, LowerLevel::SparseFlip { p_plus: 0.1, p_minus: 0.4 });
        assert!(s.check_domain(Domain::Binary, 3).is_ok());
        assert!(s.check_domain(Domain::Real, 3).is_err());

        let a = SmoothingConfig::uniform(0.8, LowerLevel::Ablation);
        assert!(a.check_domain(Domain::Binary, 3).is_ok());
        assert!(a.check_domain(Domain::Real, 3).is_ok());
        assert!(a.check_threat(&ThreatModel::DiscreteFlip { r: 1, r_a: 1, r_d: 0 }).is_ok());
    }

    #[test]
    fn parameter_ranges() {
        assert!(SmoothingConfig::uniform(1.2, LowerLevel::Ablation).validate().is_err());
        assert!(SmoothingConfig::uniform(0.5, LowerLevel::Gaussian { sigma: 0.0 }).validate().is_err());
        let per_row = SmoothingConfig {
            selection: Selection::PerRow { ps: vec![0.5, 0.9] },
            lower: LowerLevel::Ablation,
        };
        assert!(per_row.check_domain(Domain::Real, 2).is_ok());
        assert!(per_row.check_domain(Domain::Real, 3).is_err());
    }
}
