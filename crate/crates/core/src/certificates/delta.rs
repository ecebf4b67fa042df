//! The probability `Delta` that at least one adversarially controlled row
//! escapes selection.

use crate::config::Selection;
use crate::error::{Error, Result};
use crate::stats::log_binomial;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaValue {
    pub delta: f64,
    pub r_used: usize,
}

impl DeltaValue {
    /// `1 - Delta`, the probability that every perturbed row is selected.
    pub fn keep(&self) -> f64 {
        1.0 - self.delta
    }

    pub fn zero() -> Self {
        Self { delta: 0.0, r_used: 0 }
    }
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("selection probability {p} outside [0, 1]")))
    }
}

/// `1 - p^r`.
pub fn delta_uniform(p: f64, r: usize) -> Result<DeltaValue> {
    check_prob(p)?;
    let r_i32 = i32::try_from(r).map_err(|_| Error::domain(format!("row budget {r} too large")))?;
    Ok(DeltaValue { delta: (1.0 - p.powi(r_i32)).clamp(0.0, 1.0), r_used: r })
}

/// `1 - prod` of the `r` smallest selection probabilities: the adversary
/// attacks the rows least likely to be selected.
pub fn delta_nonuniform(ps: &[f64], r: usize) -> Result<DeltaValue> {
    if r > ps.len() {
        return Err(Error::domain(format!("row budget {r} exceeds {} rows", ps.len())));
    }
    for &p in ps {
        check_prob(p)?;
    }
    let mut sorted = ps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let keep: f64 = sorted[..r].iter().product();
    Ok(DeltaValue { delta: (1.0 - keep).clamp(0.0, 1.0), r_used: r })
}

/// `Delta` for uniform-subset ablation of `k` out of `n` rows:
/// `1 - C(n - r, k) / C(n, k)`.
pub fn delta_levine(n: usize, k: usize, r: usize) -> Result<DeltaValue> {
    if k > n || r > n {
        return Err(Error::domain(format!("need k <= N and r <= N, got N={n}, k={k}, r={r}")));
    }
    if k > n - r {
        return Ok(DeltaValue { delta: 1.0, r_used: r });
    }
    let log_ratio = log_binomial((n - r) as u64, k as u64)? - log_binomial(n as u64, k as u64)?;
    Ok(DeltaValue { delta: (-log_ratio.exp_m1()).clamp(0.0, 1.0), r_used: r })
}

/// `Delta` for a selection scheme at row budget `r`.
pub fn delta_for(selection: &Selection, r: usize) -> Result<DeltaValue> {
    match selection {
        Selection::Uniform { p } => delta_uniform(*p, r),
        Selection::PerRow { ps } => delta_nonuniform(ps, r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_values() {
        for r in 0..6 {
            assert_eq!(delta_uniform(1.0, r).unwrap().delta, 0.0);
        }
        assert_eq!(delta_uniform(0.0, 1).unwrap().delta, 1.0);
        assert!((delta_uniform(0.9, 2).unwrap().delta - 0.19).abs() < 1e-15);
        assert!((delta_uniform(0.85, 3).unwrap().delta - 0.385_875).abs() < 1e-15);
        assert_eq!(delta_uniform(0.3, 0).unwrap().delta, 0.0);
        assert!(delta_uniform(1.5, 1).is_err());
    }

    #[test]
    fn nonuniform_values() {
        let d = delta_nonuniform(&[0.5, 0.9, 0.99], 2).unwrap();
        assert!((d.delta - 0.55).abs() < 1e-15);
        assert_eq!(delta_nonuniform(&[0.5, 0.9], 0).unwrap().delta, 0.0);
        assert!(delta_nonuniform(&[0.5, 0.9], 3).is_err());
        let same = delta_nonuniform(&[0.7; 5], 3).unwrap().delta;
        assert!((same - delta_uniform(0.7, 3).unwrap().delta).abs() < 1e-15);
    }

    #[test]
    fn levine_values() {
        assert!((delta_levine(4, 1, 1).unwrap().delta - 0.25).abs() < 1e-15);
        assert_eq!(delta_levine(10, 0, 4).unwrap().delta, 0.0);
        assert_eq!(delta_levine(10, 6, 0).unwrap().delta, 0.0);
        assert_eq!(delta_levine(5, 4, 2).unwrap().delta, 1.0);
        // C(8,3)/C(10,3) = 56/120.
        assert!((delta_levine(10, 3, 2).unwrap().delta - (1.0 - 56.0 / 120.0)).abs() < 1e-14);
        assert!(delta_levine(3, 4, 1).is_err());
    }

    proptest! {
        #[test]
        fn uniform_monotone_in_r(p in 0.0f64..=1.0, r in 0usize..50) {
            prop_assert!(delta_uniform(p, r + 1).unwrap().delta >= delta_uniform(p, r).unwrap().delta);
        }

        // Matching p = 1 - k/N, the subset scheme's Delta is never smaller.
        #[test]
        fn bernoulli_delta_below_subset_delta(n in 1usize..200, k_frac in 0.0f64..1.0, r_frac in 0.0f64..1.0) {
            let k = ((n as f64) * k_frac) as usize;
            let r = ((n as f64) * r_frac) as usize;
            let s = delta_uniform(1.0 - k as f64 / n as f64, r).unwrap().delta;
            let l = delta_levine(n, k, r).unwrap().delta;
            prop_assert!(s <= l + 1e-12, "S={} L={}", s, l);
        }
    }
}
