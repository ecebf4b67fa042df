//! Closed-form certificates for the Gaussian lower level.

use super::delta::DeltaValue;
use crate::error::{Error, Result};
use crate::record::Radius;
use crate::stats::{std_normal_cdf, std_normal_quantile_ext};

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("sigma must be positive, got {sigma}")))
    }
}

fn shifted(p_y: f64, shift: f64) -> f64 {
    if shift == 0.0 {
        return p_y.clamp(0.0, 1.0);
    }
    // An infinite quantile stays infinite, so p = 0 and p = 1 are fixed points.
    std_normal_cdf(std_normal_quantile_ext(p_y) + shift)
}

/// `Phi(Phi^-1(p_y) - epsilon / sigma)`: the smallest vote probability any
/// classifier with clean probability `p_y` can have at l2 distance `epsilon`.
pub fn gaussian_lower_bound(p_y: f64, epsilon: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(shifted(p_y, -epsilon / sigma))
}

/// `Phi(Phi^-1(p_y) + epsilon / sigma)`.
pub fn gaussian_upper_bound(p_y: f64, epsilon: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(shifted(p_y, epsilon / sigma))
}

/// Hierarchical lower bound: the lower-level bound at the adjusted budget
/// `(p_y - Delta) / (1 - Delta)`, scaled by `1 - Delta`.
pub fn hier_gaussian_lower(p_y: f64, epsilon: f64, sigma: f64, delta: DeltaValue) -> Result<f64> {
    check_sigma(sigma)?;
    let keep = delta.keep();
    if keep <= 0.0 || p_y <= delta.delta {
        return Ok(0.0);
    }
    let budget = ((p_y - delta.delta) / keep).clamp(0.0, 1.0);
    Ok(gaussian_lower_bound(budget, epsilon, sigma)? * keep)
}

/// Hierarchical upper bound: the lower-level upper bound at `p_y / (1 - Delta)`,
/// scaled by `1 - Delta`, plus `Delta`.
pub fn hier_gaussian_upper(p_y: f64, epsilon: f64, sigma: f64, delta: DeltaValue) -> Result<f64> {
    check_sigma(sigma)?;
    let keep = delta.keep();
    if keep <= 0.0 {
        return Ok(1.0);
    }
    let budget = (p_y / keep).clamp(0.0, 1.0);
    if budget >= 1.0 {
        return Ok(1.0);
    }
    Ok((gaussian_upper_bound(budget, epsilon, sigma)? * keep + delta.delta).min(1.0))
}

/// Largest `epsilon` for which the binary test `hier_lower > 1/2` passes:
/// `sigma (Phi^-1((p_y - Delta)/(1 - Delta)) - Phi^-1(1 / (2 (1 - Delta))))`.
pub fn hier_gaussian_max_radius(p_y: f64, sigma: f64, delta: DeltaValue) -> Result<Radius> {
    check_sigma(sigma)?;
    let keep = delta.keep();
    if delta.delta >= 0.5 || p_y <= delta.delta {
        return Ok(Radius::Finite(0.0));
    }
    let budget = ((p_y - delta.delta) / keep).clamp(0.0, 1.0);
    let threshold = 0.5 / keep;
    if budget <= threshold {
        return Ok(Radius::Finite(0.0));
    }
    if budget >= 1.0 {
        return Ok(Radius::Unbounded);
    }
    let gap = std_normal_quantile_ext(budget) - std_normal_quantile_ext(threshold);
    Ok(Radius::Finite((sigma * gap).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::delta::delta_uniform;
    use proptest::prelude::*;

    const PHI_MINUS_ONE: f64 = 0.158_655_253_931_457_05;
    const PHI_ONE: f64 = 0.841_344_746_068_542_9;

    fn d(delta: f64) -> DeltaValue {
        DeltaValue { delta, r_used: 1 }
    }

    #[test]
    fn plain_bounds() {
        assert_eq!(gaussian_lower_bound(0.73, 0.0, 2.0).unwrap(), 0.73);
        assert!((gaussian_lower_bound(0.5, 0.7, 0.7).unwrap() - PHI_MINUS_ONE).abs() < 1e-15);
        assert!((gaussian_upper_bound(0.5, 0.7, 0.7).unwrap() - PHI_ONE).abs() < 1e-15);
        assert_eq!(gaussian_lower_bound(1.0, 3.0, 1.0).unwrap(), 1.0);
        assert_eq!(gaussian_lower_bound(0.0, 3.0, 1.0).unwrap(), 0.0);
        assert!(gaussian_lower_bound(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn hierarchical_reference_value() {
        let delta = delta_uniform(0.85, 3).unwrap();
        let got = hier_gaussian_lower(0.99, 0.3, 0.5, delta).unwrap();
        // Reference computed in 40-digit arithmetic.
        assert!((got - 0.575_988_155_181_021_03).abs() < 1e-12, "{got}");
        assert_eq!(hier_gaussian_lower(0.3, 0.3, 0.5, d(0.3)).unwrap(), 0.0);
    }

    #[test]
    fn max_radius_reference_value() {
        let r = hier_gaussian_max_radius(0.99, 1.0, d(0.19)).unwrap().as_f64();
        assert!((r - 1.947_842_362_846_936_3).abs() < 1e-9, "{r}");
        let at = hier_gaussian_lower(0.99, r, 1.0, d(0.19)).unwrap();
        assert!((at - 0.5).abs() < 1e-8);
    }

    #[test]
    fn max_radius_edges() {
        assert_eq!(hier_gaussian_max_radius(0.99, 1.0, d(0.5)).unwrap(), Radius::Finite(0.0));
        assert_eq!(hier_gaussian_max_radius(1.0, 1.0, d(0.2)).unwrap(), Radius::Unbounded);
        // (p - D)/(1 - D) = 1/(2(1 - D)) exactly when p = 1/2 + D.
        assert_eq!(hier_gaussian_max_radius(0.5 + 0.25, 1.0, d(0.25)).unwrap(), Radius::Finite(0.0));
        let cohen = hier_gaussian_max_radius(0.975, 2.0, d(0.0)).unwrap().as_f64();
        assert!((cohen - 2.0 * 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn upper_edges() {
        assert_eq!(hier_gaussian_upper(0.85, 0.1, 1.0, d(0.2)).unwrap(), 1.0);
        assert_eq!(hier_gaussian_upper(0.1, 0.1, 1.0, d(1.0)).unwrap(), 1.0);
        assert!(hier_gaussian_upper(0.0, 0.1, 1.0, d(0.2)).unwrap() >= 0.2);
    }

    proptest! {
        #[test]
        fn reflection(p in 0.0f64..=1.0, eps in 0.0f64..5.0, sigma in 0.05f64..5.0) {
            let up = gaussian_upper_bound(p, eps, sigma).unwrap();
            let lo = gaussian_lower_bound(1.0 - p, eps, sigma).unwrap();
            prop_assert!((up - (1.0 - lo)).abs() < 1e-12);
        }

        #[test]
        fn zero_delta_reduces(p in 0.0f64..=1.0, eps in 0.0f64..5.0, sigma in 0.05f64..5.0) {
            prop_assert_eq!(hier_gaussian_lower(p, eps, sigma, d(0.0)).unwrap(), gaussian_lower_bound(p, eps, sigma).unwrap());
            prop_assert_eq!(hier_gaussian_upper(p, eps, sigma, d(0.0)).unwrap(), gaussian_upper_bound(p, eps, sigma).unwrap());
        }

        #[test]
        fn sandwich(p in 0.0f64..=1.0, eps in 0.0f64..5.0, sigma in 0.05f64..5.0, delta in 0.0f64..1.0) {
            let lo = hier_gaussian_lower(p, eps, sigma, d(delta)).unwrap();
            let up = hier_gaussian_upper(p, eps, sigma, d(delta)).unwrap();
            prop_assert!(lo <= p + 1e-12 && p <= up + 1e-12);
            prop_assert!(up >= delta - 1e-15);
        }
    }
}
