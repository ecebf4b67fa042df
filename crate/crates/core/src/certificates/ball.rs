use super::ablation::{ablation_lower, ablation_upper};
use super::delta::{delta_for, DeltaValue};
use super::discrete::{hier_discrete_lower, hier_discrete_upper, sparse_regions};
use super::gaussian::{hier_gaussian_lower, hier_gaussian_max_radius, hier_gaussian_upper};
use crate::config::{LowerLevel, SmoothingConfig};
use crate::error::{Error, Result};
use crate::record::Radius;
use crate::threat::ThreatModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallCertificate {
    pub certified: bool,
    pub delta: DeltaValue,
    /// Worst-case vote probability of the top class over the ball.
    pub lower: f64,
    /// Best-case vote probability of the runner-up (multi-class only).
    pub upper: Option<f64>,
    /// Largest certifiable l2 magnitude at this row budget (binary Gaussian only).
    pub max_epsilon: Option<Radius>,
}

/// Certify a whole threat ball. `Delta` is evaluated at the ball's largest row
/// budget, the worst case over all perturbed-row sets.
///
/// Without `p_upper_b` this is the binary test `lower > 1/2`; with it, the
/// multi-class test `lower(A) > upper(B)`.
pub fn certify_ball(
    p_lower_a: f64,
    p_upper_b: Option<f64>,
    config: &SmoothingConfig,
    threat: &ThreatModel,
) -> Result<BallCertificate> {
    config.validate()?;
    config.check_threat(threat)?;
    threat.validate()?;
    for p in std::iter::once(p_lower_a).chain(p_upper_b) {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("vote probability bound {p} outside [0, 1]")));
        }
    }
    let delta = delta_for(&config.selection, threat.r())?;
    let (lower, upper, max_epsilon) = match (&config.lower, threat) {
        (LowerLevel::Gaussian { sigma }, ThreatModel::ContinuousL2 { epsilon, .. }) => {
            let lower = hier_gaussian_lower(p_lower_a, *epsilon, *sigma, delta)?;
            let upper = p_upper_b.map(|pb| hier_gaussian_upper(pb, *epsilon, *sigma, delta)).transpose()?;
            let radius = match p_upper_b {
                None => Some(hier_gaussian_max_radius(p_lower_a, *sigma, delta)?),
                Some(_) => None,
            };
            (lower, upper, radius)
        }
        (LowerLevel::SparseFlip { p_plus, p_minus }, ThreatModel::DiscreteFlip { r_a, r_d, .. }) => {
            let table = sparse_regions(*r_a, *r_d, *p_plus, *p_minus)?;
            let lower = hier_discrete_lower(p_lower_a, delta, &table);
            let upper = p_upper_b.map(|pb| hier_discrete_upper(pb, delta, &table));
            (lower, upper, None)
        }
        (LowerLevel::Ablation, _) => {
            (ablation_lower(p_lower_a, delta), p_upper_b.map(|pb| ablation_upper(pb, delta)), None)
        }
        _ => unreachable!("pairing checked above"),
    };
    let certified = match upper {
        None => lower > 0.5,
        Some(u) => lower > u,
    };
    Ok(BallCertificate { certified, delta, lower, upper, max_epsilon })
}
