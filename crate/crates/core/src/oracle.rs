//! Ground truth for small instances: exhaustive enumeration of the joint
//! outcome space `(W, tau)` under the clean and perturbed smoothing
//! distributions, and an exact worst-case classifier computed directly on the
//! enumerated outcomes. Also a one-dimensional halfspace computation of the
//! Gaussian worst case that avoids the normal quantile.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certificates::{
    delta_for, gaussian_lower_bound, hier_discrete_lower, hier_discrete_upper, sparse_regions, DeltaValue,
};
use crate::config::{LowerLevel, Selection, SmoothingConfig};
use crate::error::{Error, Result};
use crate::matrix::{extend, flip_counts, row_distance, Domain, ExtendedMatrix, FeatureMatrix};
use crate::stats::std_normal_cdf;

pub const MAX_ROWS: usize = 4;
pub const MAX_COLS: usize = 3;

/// One joint outcome with its probability under both distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeAtom {
    pub z: ExtendedMatrix,
    pub prob_clean: f64,
    pub prob_perturbed: f64,
}

/// Atom masses keyed by the bit patterns of `W` and `tau` (row-major, bit
/// `i * D + j` for cell `(i, j)`).
#[derive(Debug, Clone, Copy, PartialEq)]
struct RawAtom {
    w: u32,
    tau: u32,
    clean: f64,
    perturbed: f64,
}

fn to_bits(x: &FeatureMatrix) -> u32 {
    x.values()
        .iter()
        .enumerate()
        .fold(0, |acc, (k, v)| if *v == 1.0 { acc | (1 << k) } else { acc })
}

fn selection_probs(selection: &Selection, n: usize) -> Result<Vec<f64>> {
    match selection {
        Selection::Uniform { p } => Ok(vec![*p; n]),
        Selection::PerRow { ps } if ps.len() == n => Ok(ps.clone()),
        Selection::PerRow { ps } => Err(Error::dim(format!("{} selection probabilities for {n} rows", ps.len()))),
    }
}

fn check_instance(x: &FeatureMatrix, x_tilde: &FeatureMatrix, config: &SmoothingConfig) -> Result<()> {
    row_distance(x, x_tilde)?;
    if x.domain() != Domain::Binary {
        return Err(Error::incompatible("outcome enumeration needs binary data"));
    }
    if matches!(config.lower, LowerLevel::Gaussian { .. }) {
        return Err(Error::incompatible("Gaussian lower level has no finite outcome space"));
    }
    if x.n_rows() > MAX_ROWS || x.n_cols() > MAX_COLS {
        return Err(Error::TooLarge(format!(
            "{}x{} matrix exceeds the {MAX_ROWS}x{MAX_COLS} enumeration bound",
            x.n_rows(),
            x.n_cols()
        )));
    }
    config.check_domain(x.domain(), x.n_rows())
}

/// Probability that a selected row `x` (bits) is smoothed into `w`.
fn row_noise_mass(x: u32, w: u32, d: usize, lower: &LowerLevel) -> f64 {
    match *lower {
        LowerLevel::SparseFlip { p_plus, p_minus } => (0..d)
            .map(|j| {
                let (xb, wb) = ((x >> j) & 1, (w >> j) & 1);
                match (xb, wb) {
                    (0, 0) => 1.0 - p_plus,
                    (0, _) => p_plus,
                    (_, 0) => p_minus,
                    _ => 1.0 - p_minus,
                }
            })
            .product(),
        LowerLevel::Ablation => f64::from(u8::from(w == 0)),
        LowerLevel::Gaussian { .. } => unreachable!("rejected by check_instance"),
    }
}

fn enumerate_raw(x: &FeatureMatrix, x_tilde: &FeatureMatrix, config: &SmoothingConfig) -> Result<Vec<RawAtom>> {
    check_instance(x, x_tilde, config)?;
    let (n, d) = (x.n_rows(), x.n_cols());
    let ps = selection_probs(&config.selection, n)?;
    let row_mask = (1u32 << d) - 1;
    let (xb, xtb) = (to_bits(x), to_bits(x_tilde));
    let mut out = Vec::new();
    for tau in 0..1u32 << n {
        let phi: f64 = (0..n).map(|i| if (tau >> i) & 1 == 1 { ps[i] } else { 1.0 - ps[i] }).product();
        if phi == 0.0 {
            continue;
        }
        for w in 0..1u32 << (n * d) {
            let mass = |base: u32| -> f64 {
                let mut m = phi;
                for i in 0..n {
                    let (br, wr) = ((base >> (i * d)) & row_mask, (w >> (i * d)) & row_mask);
                    m *= if (tau >> i) & 1 == 1 {
                        row_noise_mass(br, wr, d, &config.lower)
                    } else {
                        f64::from(u8::from(br == wr))
                    };
                    if m == 0.0 {
                        break;
                    }
                }
                m
            };
            let (clean, perturbed) = (mass(xb), mass(xtb));
            if clean > 0.0 || perturbed > 0.0 {
                out.push(RawAtom { w, tau, clean, perturbed });
            }
        }
    }
    Ok(out)
}

/// Every outcome with positive mass under either distribution.
pub fn enumerate_outcomes(
    x: &FeatureMatrix,
    x_tilde: &FeatureMatrix,
    config: &SmoothingConfig,
) -> Result<Vec<OutcomeAtom>> {
    let raw = enumerate_raw(x, x_tilde, config)?;
    let (n, d) = (x.n_rows(), x.n_cols());
    raw.into_iter()
        .map(|a| {
            let values = (0..n * d).map(|k| f64::from((a.w >> k) & 1)).collect();
            let w = FeatureMatrix::new(n, d, Domain::Binary, values)?;
            let tau: Vec<u8> = (0..n).map(|i| ((a.tau >> i) & 1) as u8).collect();
            let mut z = extend(w, tau.clone())?;
            if config.lower == LowerLevel::Ablation {
                z = z.with_ablation(tau.iter().map(|t| *t == 1).collect())?;
            }
            Ok(OutcomeAtom { z, prob_clean: a.clean, prob_perturbed: a.perturbed })
        })
        .collect()
}

/// Decreasing `clean / perturbed`; zero perturbed mass gives an infinite ratio.
fn by_ratio_desc(a: &(f64, f64), b: &(f64, f64)) -> Ordering {
    (b.0 / b.1).total_cmp(&(a.0 / a.1))
}

fn check_budget(budget: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&budget) {
        return Err(Error::domain(format!("budget {budget} outside [0, 1]")));
    }
    Ok(budget.clamp(0.0, 1.0))
}

fn greedy(masses: &[(f64, f64)], budget: f64, minimize: bool) -> f64 {
    let mut free = 0.0;
    let mut order: Vec<(f64, f64)> = Vec::with_capacity(masses.len());
    for &(c, p) in masses {
        if c > 0.0 {
            order.push((c, p));
        } else if !minimize {
            free += p;
        }
    }
    order.sort_by(by_ratio_desc);
    if !minimize {
        order.reverse();
    }
    let mut remaining = budget;
    let mut acc = free;
    for (c, p) in order {
        if remaining <= 0.0 {
            break;
        }
        if remaining >= c {
            acc += p;
            remaining -= c;
        } else {
            acc += p * (remaining / c);
            remaining = 0.0;
        }
    }
    acc
}

fn masses(atoms: &[OutcomeAtom]) -> Vec<(f64, f64)> {
    atoms.iter().map(|a| (a.prob_clean, a.prob_perturbed)).collect()
}

/// Smallest perturbed vote probability of any (fractional) classifier whose
/// clean vote probability is `budget`.
pub fn exact_worst_case_lower(atoms: &[OutcomeAtom], budget: f64) -> Result<f64> {
    Ok(greedy(&masses(atoms), check_budget(budget)?, true))
}

/// Largest perturbed vote probability of any classifier with clean vote probability `budget`.
pub fn exact_worst_case_upper(atoms: &[OutcomeAtom], budget: f64) -> Result<f64> {
    Ok(greedy(&masses(atoms), check_budget(budget)?, false))
}

/// Worst-case perturbed probability under Gaussian smoothing, computed on the
/// line through the shift `delta` with `||delta|| = dist`. The worst-case set
/// is a halfspace `{s <= t}` in the projected coordinate `s`, which is
/// `N(0, sigma^2)` under the clean input and `N(dist, sigma^2)` under the
/// perturbed one. `t` is found by bisection on the CDF alone.
pub fn gaussian_halfspace_check(p_y: f64, dist: f64, sigma: f64) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 || dist.is_nan() || dist < 0.0 || !(0.0..=1.0).contains(&p_y) {
        return Err(Error::domain(format!("bad halfspace instance p={p_y} dist={dist} sigma={sigma}")));
    }
    if p_y == 0.0 || p_y == 1.0 || dist == 0.0 {
        return Ok(p_y);
    }
    // Solve in whichever tail keeps the target representable to full precision.
    let upper_half = p_y > 0.5;
    let target = if upper_half { 1.0 - p_y } else { p_y };
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = if upper_half { std_normal_cdf(-mid) > target } else { std_normal_cdf(mid) < target };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok(std_normal_cdf(t - dist / sigma))
}

/// Clean and perturbed mass of the three non-empty regions of the joint
/// outcome space, relative to the set of perturbed rows:
/// R1 = some perturbed row unselected, clean support;
/// R2 = every perturbed row selected;
/// R3 = some perturbed row unselected, perturbed support.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RegionMasses {
    pub r1: (f64, f64),
    pub r2: (f64, f64),
    pub r3: (f64, f64),
}

fn region_masses_raw(raw: &[RawAtom], changed: u32) -> RegionMasses {
    let mut m = RegionMasses::default();
    for a in raw {
        let slot = if a.tau & changed == changed {
            &mut m.r2
        } else if a.clean > 0.0 {
            &mut m.r1
        } else {
            &mut m.r3
        };
        slot.0 += a.clean;
        slot.1 += a.perturbed;
    }
    m
}

pub fn region_masses(atoms: &[OutcomeAtom], changed_rows: &[usize]) -> RegionMasses {
    let changed = changed_rows.iter().fold(0u32, |acc, i| acc | (1 << i));
    let raw: Vec<RawAtom> = atoms
        .iter()
        .map(|a| RawAtom {
            w: 0,
            tau: a.z.indicator().iter().enumerate().fold(0, |acc, (i, t)| acc | (u32::from(*t) << i)),
            clean: a.prob_clean,
            perturbed: a.prob_perturbed,
        })
        .collect();
    region_masses_raw(&raw, changed)
}

/// One enumerable instance of the oracle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleInstance {
    pub x: FeatureMatrix,
    pub x_tilde: FeatureMatrix,
    pub config: SmoothingConfig,
}

fn fmt_bits(m: &FeatureMatrix) -> String {
    let rows: Vec<String> = (0..m.n_rows())
        .map(|i| m.row(i).iter().map(|v| if *v == 1.0 { '1' } else { '0' }).collect())
        .collect();
    rows.join("/")
}

impl fmt::Display for OracleInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match &self.config.selection {
            Selection::Uniform { p } => format!("{p}"),
            Selection::PerRow { ps } => format!("{ps:?}"),
        };
        let lower = match self.config.lower {
            LowerLevel::SparseFlip { p_plus, p_minus } => format!("sparse({p_plus},{p_minus})"),
            LowerLevel::Ablation => "ablation".into(),
            LowerLevel::Gaussian { sigma } => format!("gaussian({sigma})"),
        };
        write!(
            f,
            "N={} D={} p={p} lower={lower} X={} X~={}",
            self.x.n_rows(),
            self.x.n_cols(),
            fmt_bits(&self.x),
            fmt_bits(&self.x_tilde)
        )
    }
}

/// Parameter grid for the exhaustive suite.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleGrid {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub ps: Vec<f64>,
    pub flips: Vec<(f64, f64)>,
    pub include_ablation: bool,
    /// Vote probabilities at which bounds are compared.
    pub budgets: Vec<f64>,
    pub gaussian_points: usize,
    pub seed: u64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self {
            rows: vec![1, 2, 3],
            cols: vec![1, 2],
            ps: vec![0.5, 0.8, 1.0],
            flips: vec![(0.1, 0.4), (0.05, 0.9), (0.5, 0.5)],
            include_ablation: true,
            budgets: (0..=20).map(|k| f64::from(k) * 0.05).collect(),
            gaussian_points: 1000,
            seed: 0,
        }
    }
}

fn binary_matrix(n: usize, d: usize, bits: u32) -> FeatureMatrix {
    let values = (0..n * d).map(|k| f64::from((bits >> k) & 1)).collect();
    FeatureMatrix::new(n, d, Domain::Binary, values).expect("valid shape")
}

impl OracleGrid {
    /// Every ordered pair `(X, X~)` with at least one changed row, under every
    /// configuration of the grid.
    pub fn instances(&self) -> Vec<OracleInstance> {
        let mut configs: Vec<LowerLevel> =
            self.flips.iter().map(|&(p_plus, p_minus)| LowerLevel::SparseFlip { p_plus, p_minus }).collect();
        if self.include_ablation {
            configs.push(LowerLevel::Ablation);
        }
        let mut out = Vec::new();
        for &n in &self.rows {
            for &d in &self.cols {
                let cells = n * d;
                for xb in 0..1u32 << cells {
                    for xtb in 0..1u32 << cells {
                        if xb == xtb {
                            continue;
                        }
                        let (x, x_tilde) = (binary_matrix(n, d, xb), binary_matrix(n, d, xtb));
                        for &p in &self.ps {
                            for lower in &configs {
                                out.push(OracleInstance {
                                    x: x.clone(),
                                    x_tilde: x_tilde.clone(),
                                    config: SmoothingConfig::uniform(p, lower.clone()),
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Deliberate corruption of the certificate side, to check that the suite detects faults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// Multiply every perturbed region mass by this factor.
    ScalePerturbedMass(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Tolerance for bound equivalence identities.
    pub tolerance: f64,
    /// Tolerance for region accounting identities.
    pub accounting_tolerance: f64,
    pub fault: Option<Fault>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { tolerance: 1e-9, accounting_tolerance: 1e-12, fault: None }
    }
}

/// Outcome of one identity across the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub name: &'static str,
    pub checked: usize,
    pub failures: usize,
    pub max_error: f64,
    /// First failing instance in grid order.
    pub first_failure: Option<String>,
}

impl IdentityReport {
    fn new(name: &'static str) -> Self {
        Self { name, checked: 0, failures: 0, max_error: 0.0, first_failure: None }
    }

    fn record(&mut self, error: f64, tol: f64, describe: impl FnOnce() -> String) {
        self.checked += 1;
        let error = if error.is_nan() { f64::INFINITY } else { error };
        self.max_error = self.max_error.max(error);
        if error > tol {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    fn absorb(&mut self, other: IdentityReport) {
        self.checked += other.checked;
        self.failures += other.failures;
        self.max_error = self.max_error.max(other.max_error);
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub const LOWER_EQUIVALENCE: &str = "hierarchical lower bound = exact worst case";
pub const UPPER_EQUIVALENCE: &str = "hierarchical upper bound = exact worst case";
pub const REGION_ACCOUNTING: &str = "region masses R1=Delta, R2=1-Delta, R3=Delta";
pub const ABLATION_EQUIVALENCE: &str = "ablation worst case = p -/+ Delta";
pub const GAUSSIAN_HALFSPACE: &str = "Gaussian closed form = halfspace worst case";

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub identities: Vec<IdentityReport>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.identities.iter().all(IdentityReport::passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityReport> {
        self.identities.iter().find(|r| r.name == name)
    }
}

fn changed_mask(x: &FeatureMatrix, x_tilde: &FeatureMatrix) -> Result<(u32, Vec<usize>)> {
    let dist = row_distance(x, x_tilde)?;
    let rows: Vec<usize> = dist.changed_rows.into_iter().collect();
    Ok((rows.iter().fold(0, |acc, i| acc | (1 << i)), rows))
}

fn check_instance_identities(
    inst: &OracleInstance,
    grid: &OracleGrid,
    opts: &OracleOptions,
) -> Result<[IdentityReport; 4]> {
    let mut lower_rep = IdentityReport::new(LOWER_EQUIVALENCE);
    let mut upper_rep = IdentityReport::new(UPPER_EQUIVALENCE);
    let mut acct_rep = IdentityReport::new(REGION_ACCOUNTING);
    let mut abl_rep = IdentityReport::new(ABLATION_EQUIVALENCE);

    let raw = enumerate_raw(&inst.x, &inst.x_tilde, &inst.config)?;
    let masses: Vec<(f64, f64)> = raw.iter().map(|a| (a.clean, a.perturbed)).collect();
    let (mask, rows) = changed_mask(&inst.x, &inst.x_tilde)?;
    let delta: DeltaValue = delta_for(&inst.config.selection, rows.len())?;

    let regions = region_masses_raw(&raw, mask);
    let d = delta.delta;
    let acct_err = [
        regions.r1.0 - d,
        regions.r1.1,
        regions.r2.0 - (1.0 - d),
        regions.r2.1 - (1.0 - d),
        regions.r3.0,
        regions.r3.1 - d,
    ]
    .iter()
    .fold(0.0_f64, |m, e| m.max(e.abs()));
    acct_rep.record(acct_err, opts.accounting_tolerance, || format!("{inst} regions={regions:?} delta={d}"));

    match inst.config.lower {
        LowerLevel::SparseFlip { p_plus, p_minus } => {
            let (r_a, r_d) = flip_counts(&inst.x, &inst.x_tilde)?;
            let mut table = sparse_regions(r_a, r_d, p_plus, p_minus)?;
            if let Some(Fault::ScalePerturbedMass(f)) = opts.fault {
                table = table.scale_perturbed(f);
            }
            for &b in &grid.budgets {
                let exact_lo = greedy(&masses, b, true);
                let cert_lo = hier_discrete_lower(b, delta, &table);
                lower_rep.record((exact_lo - cert_lo).abs(), opts.tolerance, || {
                    format!("{inst} p_y={b} exact={exact_lo} certificate={cert_lo}")
                });
                let exact_up = greedy(&masses, b, false);
                let cert_up = hier_discrete_upper(b, delta, &table);
                upper_rep.record((exact_up - cert_up).abs(), opts.tolerance, || {
                    format!("{inst} p_y={b} exact={exact_up} certificate={cert_up}")
                });
            }
        }
        LowerLevel::Ablation => {
            let shift = match opts.fault {
                Some(Fault::ScalePerturbedMass(f)) => d * f,
                None => d,
            };
            for &b in &grid.budgets {
                let lo = greedy(&masses, b, true);
                let up = greedy(&masses, b, false);
                let err = (lo - (b - shift).max(0.0)).abs().max((up - (b + shift).min(1.0)).abs());
                abl_rep.record(err, opts.tolerance, || format!("{inst} p_y={b} exact=({lo}, {up}) delta={d}"));
            }
        }
        LowerLevel::Gaussian { .. } => unreachable!("grid is binary"),
    }
    Ok([lower_rep, upper_rep, acct_rep, abl_rep])
}

fn gaussian_identity(grid: &OracleGrid, opts: &OracleOptions) -> Result<IdentityReport> {
    let mut rep = IdentityReport::new(GAUSSIAN_HALFSPACE);
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    for _ in 0..grid.gaussian_points {
        let p: f64 = rng.random_range(0.0..1.0);
        let dist: f64 = rng.random_range(0.0..4.0);
        let sigma: f64 = rng.random_range(0.1..3.0);
        let closed = gaussian_lower_bound(p, dist, sigma)?;
        let half = gaussian_halfspace_check(p, dist, sigma)?;
        rep.record((closed - half).abs(), opts.tolerance.min(1e-10), || {
            format!("p_y={p} dist={dist} sigma={sigma} closed={closed} halfspace={half}")
        });
    }
    Ok(rep)
}

/// Check every identity on the grid, in parallel over instances. The report
/// is independent of thread scheduling.
pub fn run_oracle_suite(grid: &OracleGrid, opts: &OracleOptions) -> Result<OracleReport> {
    let instances = grid.instances();
    let per_instance: Vec<[IdentityReport; 4]> = instances
        .par_iter()
        .map(|inst| check_instance_identities(inst, grid, opts))
        .collect::<Result<_>>()?;
    let mut totals = [
        IdentityReport::new(LOWER_EQUIVALENCE),
        IdentityReport::new(UPPER_EQUIVALENCE),
        IdentityReport::new(REGION_ACCOUNTING),
        IdentityReport::new(ABLATION_EQUIVALENCE),
    ];
    for reps in per_instance {
        for (total, rep) in totals.iter_mut().zip(reps) {
            total.absorb(rep);
        }
    }
    let mut identities: Vec<IdentityReport> = totals.into_iter().collect();
    identities.push(gaussian_identity(grid, opts)?);
    Ok(OracleReport { identities })
}
