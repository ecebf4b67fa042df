//! Sparse-flip lower level: constant-likelihood-ratio regions and the greedy
//! solution of the discrete Neyman-Pearson linear program.

use super::delta::DeltaValue;
use crate::error::{Error, Result};
use crate::stats::{log_add_exp, log_binomial, log_sum_exp};

/// A set of outcomes on which clean and perturbed likelihoods have a fixed ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    /// `ln(clean / perturbed)`; `+inf` where only the clean distribution has mass.
    pub log_ratio: f64,
    pub log_mass_clean: f64,
    pub log_mass_perturbed: f64,
}

impl Region {
    pub fn new(log_mass_clean: f64, log_mass_perturbed: f64) -> Self {
        let log_ratio = match (log_mass_clean == f64::NEG_INFINITY, log_mass_perturbed == f64::NEG_INFINITY) {
            (false, true) => f64::INFINITY,
            (true, false) => f64::NEG_INFINITY,
            _ => log_mass_clean - log_mass_perturbed,
        };
        Self { log_ratio, log_mass_clean, log_mass_perturbed }
    }

    pub fn mass_clean(&self) -> f64 {
        self.log_mass_clean.exp()
    }

    pub fn mass_perturbed(&self) -> f64 {
        self.log_mass_perturbed.exp()
    }
}

/// Regions sorted by decreasing likelihood ratio, with near-equal ratios merged.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTable {
    regions: Vec<Region>,
}

const MERGE_TOL: f64 = 1e-12;

fn same_ratio(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= MERGE_TOL * a.abs().max(b.abs()).max(1.0)
}

impl RegionTable {
    /// Build from arbitrary regions: drops empty ones, sorts, merges equal ratios.
    pub fn from_regions(regions: impl IntoIterator<Item = Region>) -> Self {
        let mut rs: Vec<Region> = regions
            .into_iter()
            .filter(|r| r.log_mass_clean > f64::NEG_INFINITY || r.log_mass_perturbed > f64::NEG_INFINITY)
            .collect();
        rs.sort_by(|a, b| b.log_ratio.total_cmp(&a.log_ratio));
        let mut merged: Vec<Region> = Vec::with_capacity(rs.len());
        for r in rs {
            match merged.last_mut() {
                Some(last) if same_ratio(last.log_ratio, r.log_ratio) => {
                    *last = Region::new(
                        log_add_exp(last.log_mass_clean, r.log_mass_clean),
                        log_add_exp(last.log_mass_perturbed, r.log_mass_perturbed),
                    );
                }
                _ => merged.push(r),
            }
        }
        Self { regions: merged }
    }

    /// A single region where both distributions coincide.
    pub fn identical() -> Self {
        Self { regions: vec![Region::new(0.0, 0.0)] }
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Total clean and perturbed mass (both 1 for a proper table).
    pub fn total_masses(&self) -> (f64, f64) {
        let lc: Vec<f64> = self.regions.iter().map(|r| r.log_mass_clean).collect();
        let lp: Vec<f64> = self.regions.iter().map(|r| r.log_mass_perturbed).collect();
        (log_sum_exp(&lc).exp(), log_sum_exp(&lp).exp())
    }

    /// Multiply every perturbed mass by `factor`. Used for fault injection in
    /// oracle self-tests.
    pub fn scale_perturbed(&self, factor: f64) -> Self {
        Self::from_regions(
            self.regions
                .iter()
                .map(|r| Region::new(r.log_mass_clean, r.log_mass_perturbed + factor.ln())),
        )
    }
}

/// `k ln p` with `0 ln 0 = 0`.
fn xlogp(k: usize, p: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * p.ln()
    }
}

fn log_binom_pmf(n: usize, k: usize, p: f64) -> Result<f64> {
    Ok(log_binomial(n as u64, k as u64)? + xlogp(k, p) + xlogp(n - k, 1.0 - p))
}

/// Regions for `r_a` inserted and `r_d` deleted bits under flip probabilities
/// `p_plus` (0 to 1) and `p_minus` (1 to 0).
///
/// Region `(a, b)` collects outcomes where `a` of the inserted positions read 1
/// and `b` of the deleted positions read 0. Bits the adversary did not touch
/// contribute identical factors to both distributions and cancel.
pub fn sparse_regions(r_a: usize, r_d: usize, p_plus: f64, p_minus: f64) -> Result<RegionTable> {
    for (name, p) in [("p_plus", p_plus), ("p_minus", p_minus)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("{name} must lie in [0, 1], got {p}")));
        }
    }
    let mut regions = Vec::with_capacity((r_a + 1) * (r_d + 1));
    for a in 0..=r_a {
        // An inserted bit reads 1 with p_plus under the clean input, 1 - p_minus under the perturbed.
        let ca = log_binom_pmf(r_a, a, p_plus)?;
        let pa = log_binom_pmf(r_a, a, 1.0 - p_minus)?;
        for b in 0..=r_d {
            // A deleted bit reads 0 with p_minus under the clean input, 1 - p_plus under the perturbed.
            let cb = log_binom_pmf(r_d, b, p_minus)?;
            let pb = log_binom_pmf(r_d, b, 1.0 - p_plus)?;
            regions.push(Region::new(ca + cb, pa + pb));
        }
    }
    Ok(RegionTable::from_regions(regions))
}

/// Minimum perturbed mass over all sets with clean mass `budget`: consume
/// regions in decreasing ratio order.
pub fn discrete_lp_lower(table: &RegionTable, budget: f64) -> f64 {
    let mut remaining = budget.clamp(0.0, 1.0);
    let mut acc = 0.0;
    for r in &table.regions {
        if remaining <= 0.0 {
            break;
        }
        if r.log_mass_clean == f64::NEG_INFINITY {
            continue;
        }
        let clean = r.mass_clean();
        if remaining >= clean {
            acc += r.mass_perturbed();
            remaining -= clean;
        } else {
            acc += remaining * (r.log_mass_perturbed - r.log_mass_clean).exp();
            remaining = 0.0;
        }
    }
    acc.clamp(0.0, 1.0)
}

/// Maximum perturbed mass over all sets with clean mass `budget`: regions the
/// clean distribution never reaches are free, the rest go in increasing ratio order.
pub fn discrete_lp_upper(table: &RegionTable, budget: f64) -> f64 {
    let mut remaining = budget.clamp(0.0, 1.0);
    let mut acc = 0.0;
    for r in table.regions.iter().rev() {
        if r.log_mass_clean == f64::NEG_INFINITY {
            acc += r.mass_perturbed();
            continue;
        }
        if remaining <= 0.0 {
            break;
        }
        let clean = r.mass_clean();
        if remaining >= clean {
            acc += r.mass_perturbed();
            remaining -= clean;
        } else {
            acc += remaining * (r.log_mass_perturbed - r.log_mass_clean).exp();
            remaining = 0.0;
        }
    }
    acc.clamp(0.0, 1.0)
}

pub fn hier_discrete_lower(p_y: f64, delta: DeltaValue, table: &RegionTable) -> f64 {
    let keep = delta.keep();
    if keep <= 0.0 || p_y <= delta.delta {
        return 0.0;
    }
    let budget = ((p_y - delta.delta) / keep).clamp(0.0, 1.0);
    discrete_lp_lower(table, budget) * keep
}

pub fn hier_discrete_upper(p_y: f64, delta: DeltaValue, table: &RegionTable) -> f64 {
    let keep = delta.keep();
    if keep <= 0.0 {
        return 1.0;
    }
    let budget = (p_y / keep).clamp(0.0, 1.0);
    if budget >= 1.0 {
        return 1.0;
    }
    (discrete_lp_upper(table, budget) * keep + delta.delta).min(1.0)
}
