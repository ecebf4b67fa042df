//! Exact statistical primitives: standard normal CDF and quantile, log-gamma,
//! regularized incomplete beta, Clopper-Pearson bounds and log binomial
//! coefficients. No external numeric dependencies, so results are identical
//! across platforms.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Overall significance level split evenly over `n_bounds` simultaneous bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceSpec {
    pub alpha: f64,
    pub n_bounds: u32,
}

impl ConfidenceSpec {
    pub fn new(alpha: f64, n_bounds: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if n_bounds == 0 {
            return Err(Error::domain("need at least one bound"));
        }
        Ok(Self { alpha, n_bounds })
    }

    /// Bonferroni-corrected level for each individual bound.
    pub fn per_bound(&self) -> f64 {
        self.alpha / f64::from(self.n_bounds)
    }
}

/// `Pr[N(0,1) > a]` for `a >= 0`.
fn upper_tail(a: f64) -> f64 {
    debug_assert!(a >= 0.0);
    let z = a / SQRT_2;
    if z < 2.0 {
        // erf(z) = 2/sqrt(pi) e^{-z^2} sum_n 2^n z^{2n+1} / (1*3*...*(2n+1)); all terms positive.
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        while term > sum * 1e-17 {
            term *= 2.0 * z2 / (2.0 * n + 3.0);
            sum += term;
            n += 1.0;
        }
        return 0.5 * (1.0 - 2.0 * FRAC_1_SQRT_PI * (-z2).exp() * sum);
    }
    if z > 27.3 {
        return 0.0;
    }
    // Laplace continued fraction, modified Lentz:
    // erfc(z) = e^{-z^2}/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    let tiny = 1e-300;
    let mut f = z;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..2000 {
        let ak = 0.5 * k as f64;
        d = z + ak * d;
        if d.abs() < tiny {
            d = tiny;
        }
        d = 1.0 / d;
        c = z + ak / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    // e^{-a^2/2} with a^2 split into its rounded value and the rounding error.
    let sq = a * a;
    let err = a.mul_add(a, -sq);
    let gauss = (-0.5 * sq).exp() * (1.0 - 0.5 * err);
    0.5 * gauss * FRAC_1_SQRT_PI / f
}

/// Standard normal CDF. Saturates to 0/1 for large `|x|`; keeps full relative
/// precision in the lower tail.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    let tail = upper_tail(x.abs());
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

fn lower_tail_quantile(q: f64) -> f64 {
    debug_assert!(q > 0.0 && q <= 0.5);
    // Rational starting point, |error| < 4.5e-4.
    let t = (-2.0 * q.ln()).sqrt();
    let num = 2.515_517 + t * (0.802_853 + t * 0.010_328);
    let den = 1.0 + t * (1.432_788 + t * (0.189_269 + t * 0.001_308));
    let mut x = -(t - num / den);
    // Halley refinement against the accurate CDF.
    for _ in 0..10 {
        let pdf = std_normal_pdf(x);
        if pdf == 0.0 {
            break;
        }
        let u = (std_normal_cdf(x) - q) / pdf;
        let step = u / (1.0 + 0.5 * x * u);
        x -= step;
        if step.abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Inverse of [`std_normal_cdf`] on `(0, 1)`.
pub fn std_normal_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("normal quantile needs q in (0, 1), got {q}")));
    }
    Ok(if q == 0.5 {
        0.0
    } else if q < 0.5 {
        lower_tail_quantile(q)
    } else {
        -lower_tail_quantile(1.0 - q)
    })
}

/// Quantile extended to the closed interval: `q <= 0` maps to `-inf`, `q >= 1` to `+inf`.
pub fn std_normal_quantile_ext(q: f64) -> f64 {
    if q <= 0.0 {
        f64::NEG_INFINITY
    } else if q >= 1.0 {
        f64::INFINITY
    } else {
        std_normal_quantile(q).expect("q in (0,1)")
    }
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)]`, valid for `x >= 10`.
fn stirling_correction(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0
        - inv2
            * (1.0 / 360.0
                - inv2
                    * (1.0 / 1260.0
                        - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0 - inv2 * (691.0 / 360_360.0 - inv2 / 156.0))))))
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_correction(x);
    }
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln B(a, b)` without the catastrophic cancellation of three large log-gammas.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, large) = if a <= b { (a, b) } else { (b, a) };
    let sum = small + large;
    if small >= 10.0 {
        LN_SQRT_2PI - 0.5 * large.ln()
            + (small - 0.5) * (small / sum).ln()
            + large * (-small / sum).ln_1p()
            + stirling_correction(small)
            + stirling_correction(large)
            - stirling_correction(sum)
    } else if large >= 10.0 {
        // ln Gamma(large) - ln Gamma(sum) expanded around `large`.
        ln_gamma(small) + (large - 0.5) * (-small / sum).ln_1p() - small * sum.ln() + small
            + stirling_correction(large)
            - stirling_correction(sum)
    } else {
        ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..20_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cont_frac(a, b, x) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - ln_front.exp() * beta_cont_frac(b, a, 1.0 - x) / b).clamp(0.0, 1.0)
    }
}

fn check_counts(successes: u64, n: u64, alpha: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("Clopper-Pearson needs n >= 1"));
    }
    if successes > n {
        return Err(Error::domain(format!("{successes} successes out of {n} trials")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// The `level`-quantile of `Beta(a, b)` by bisection, returning the lower end
/// of the final bracket so that `I_p(a, b) <= level`.
fn beta_quantile_lower(a: f64, b: f64, level: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reg_inc_beta(a, b, mid) > level {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    lo
}

/// One-sided exact lower confidence bound on a binomial proportion: the
/// `alpha` quantile of `Beta(successes, n - successes + 1)`.
pub fn clopper_pearson_lower(successes: u64, n: u64, alpha: f64) -> Result<f64> {
    check_counts(successes, n, alpha)?;
    if successes == 0 {
        return Ok(0.0);
    }
    if successes == n {
        // I_p(n, 1) = p^n.
        return Ok(alpha.powf(1.0 / n as f64));
    }
    Ok(beta_quantile_lower(successes as f64, (n - successes + 1) as f64, alpha))
}

/// One-sided exact upper bound, by reflection of the lower bound.
pub fn clopper_pearson_upper(successes: u64, n: u64, alpha: f64) -> Result<f64> {
    check_counts(successes, n, alpha)?;
    Ok(1.0 - clopper_pearson_lower(n - successes, n, alpha)?)
}

/// `ln C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!("C({n}, {k}) with k > n")));
    }
    let k = k.min(n - k);
    if k == 0 {
        return Ok(0.0);
    }
    if k <= 20 {
        let base = (n - k) as f64;
        return Ok((1..=k).map(|i| ((base + i as f64) / i as f64).ln()).sum());
    }
    Ok(-((n + 1) as f64).ln() - ln_beta((k + 1) as f64, (n - k + 1) as f64))
}

/// `ln(e^a + e^b)`, with `-inf` as the log of zero.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln sum_i e^{x_i}`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
