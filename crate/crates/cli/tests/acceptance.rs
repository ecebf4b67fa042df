//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hiersmooth_core::certificates::{
    ablation_lower, ablation_upper, certify_ball, delta_uniform, discrete_lp_lower, discrete_lp_upper,
    gaussian_lower_bound, gaussian_upper_bound, hier_discrete_lower, hier_discrete_upper, hier_gaussian_lower,
    hier_gaussian_max_radius, hier_gaussian_upper, sparse_regions, DeltaValue,
};
use hiersmooth_core::dataset::{write_jsonl, Sample};
use hiersmooth_core::harness::classifiers::{Centroid, Coin, Constant};
use hiersmooth_core::harness::{certify_input, make_synthetic_dataset, CertifyParams, SyntheticSpec};
use hiersmooth_core::oracle::{
    gaussian_halfspace_check, run_oracle_suite, OracleGrid, OracleOptions, ABLATION_EQUIVALENCE, LOWER_EQUIVALENCE,
    REGION_ACCOUNTING, UPPER_EQUIVALENCE,
};
use hiersmooth_core::stats::{clopper_pearson_lower, clopper_pearson_upper, std_normal_quantile};
use hiersmooth_core::sweep::{
    pareto_front, points_at, run_sweep, weakly_dominates, LowerFamily, Method, ParamRange, Sampling, SweepSpec,
    TrialResult,
};
use hiersmooth_core::threat::{continuous_grid, discrete_grid};
use hiersmooth_core::{Domain, FeatureMatrix, LowerLevel, Radius, RngStream, SmoothingConfig, ThreatModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($fmt)+));
        }
    };
}

fn within_time(start: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took <= limit, "{what} took {took:?}, limit {limit:?}");
    Ok(took)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let report = run_oracle_suite(&OracleGrid::default(), &OracleOptions::default()).map_err(|e| e.to_string())?;
    let took = within_time(start, Duration::from_secs(60), "oracle suite")?;
    let mut detail = Vec::new();
    for name in [LOWER_EQUIVALENCE, UPPER_EQUIVALENCE] {
        let r = report.get(name).ok_or("identity missing")?;
        ensure!(r.checked > 0, "{name}: nothing checked");
        ensure!(r.passed(), "{name}: {} failures, first {:?}", r.failures, r.first_failure);
        detail.push(format!("{} checks max err {:.1e}", r.checked, r.max_error));
    }
    Ok(format!("{} in {took:.1?}", detail.join(", ")))
}

fn region_accounting() -> Outcome {
    let report = run_oracle_suite(&OracleGrid { gaussian_points: 0, ..Default::default() }, &OracleOptions::default())
        .map_err(|e| e.to_string())?;
    let r = report.get(REGION_ACCOUNTING).ok_or("identity missing")?;
    ensure!(r.checked > 0 && r.passed(), "{} failures, first {:?}", r.failures, r.first_failure);
    Ok(format!("{} instances, max err {:.1e}", r.checked, r.max_error))
}

fn special_cases() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let zero = delta_uniform(1.0, 3).map_err(|e| e.to_string())?;
    ensure!(zero.delta == 0.0, "p = 1 gives delta {}", zero.delta);
    let mut n = 0;
    for _ in 0..2000 {
        let p: f64 = rng.random();
        let eps = rng.random_range(0.0..3.0);
        let sigma = rng.random_range(0.1..2.0);
        let gl = hier_gaussian_lower(p, eps, sigma, zero).unwrap();
        let gu = hier_gaussian_upper(p, eps, sigma, zero).unwrap();
        ensure!((gl - gaussian_lower_bound(p, eps, sigma).unwrap()).abs() <= TOL, "gaussian lower p={p} eps={eps}");
        ensure!((gu - gaussian_upper_bound(p, eps, sigma).unwrap()).abs() <= TOL, "gaussian upper p={p} eps={eps}");
        let table = sparse_regions(rng.random_range(0..6), rng.random_range(0..6), rng.random_range(0.0..0.5), rng.random_range(0.3..1.0))
            .unwrap();
        ensure!((hier_discrete_lower(p, zero, &table) - discrete_lp_lower(&table, p)).abs() <= TOL, "discrete lower p={p}");
        ensure!((hier_discrete_upper(p, zero, &table) - discrete_lp_upper(&table, p)).abs() <= TOL, "discrete upper p={p}");

        let d = delta_uniform(rng.random_range(0.0..1.0), rng.random_range(1..5)).unwrap();
        ensure!((ablation_lower(p, d) - (p - d.delta).max(0.0)).abs() <= TOL, "ablation lower p={p} delta={}", d.delta);
        ensure!((ablation_upper(p, d) - (p + d.delta).min(1.0)).abs() <= TOL, "ablation upper p={p} delta={}", d.delta);
        n += 1;
    }
    let report = run_oracle_suite(&OracleGrid { gaussian_points: 0, ..Default::default() }, &OracleOptions { tolerance: TOL, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let abl = report.get(ABLATION_EQUIVALENCE).ok_or("identity missing")?;
    ensure!(abl.passed(), "ablation oracle: {:?}", abl.first_failure);

    // p = 0: nothing is ever certified, whatever the vote bounds.
    let threats: Vec<ThreatModel> = continuous_grid(&[1, 2], &[0.0, 0.5]);
    let flips = discrete_grid(&[1, 2], &[0, 1], &[0, 1]);
    for p_a in [0.6, 0.99, 1.0] {
        for lower in [LowerLevel::Gaussian { sigma: 1.0 }, LowerLevel::Ablation] {
            let cfg = SmoothingConfig::uniform(0.0, lower);
            for t in &threats {
                ensure!(!certify_ball(p_a, None, &cfg, t).unwrap().certified, "p=0 certified {t}");
                ensure!(!certify_ball(p_a, Some(0.0), &cfg, t).unwrap().certified, "p=0 certified {t}");
            }
        }
        let cfg = SmoothingConfig::uniform(0.0, LowerLevel::SparseFlip { p_plus: 0.01, p_minus: 0.6 });
        for t in &flips {
            ensure!(!certify_ball(p_a, None, &cfg, t).unwrap().certified, "p=0 certified {t}");
        }
    }
    let x = FeatureMatrix::zeros(3, 2, Domain::Real).unwrap();
    let cfg = SmoothingConfig::uniform(0.0, LowerLevel::Gaussian { sigma: 1.0 });
    let params = CertifyParams { n0: 100, n1: 1000, ..Default::default() };
    let rec = certify_input(&Constant::new(1, 2), "x", &x, &cfg, &threats, &params, RngStream::new(0, 0))
        .map_err(|e| e.to_string())?;
    ensure!(rec.verdicts.iter().all(|v| !v.certified), "end-to-end p=0 certified");
    Ok(format!("{n} random reductions, {} ablation oracle checks, p=0 never certifies", abl.checked))
}

fn gaussian_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p: f64 = rng.random_range(0.001..0.999);
        let eps = rng.random_range(0.0..3.0);
        let sigma = rng.random_range(0.1..3.0);
        let closed = gaussian_lower_bound(p, eps, sigma).unwrap();
        let half = gaussian_halfspace_check(p, eps, sigma).unwrap();
        worst = worst.max((closed - half).abs());
        ensure!((closed - half).abs() <= 1e-10, "p={p} eps={eps} sigma={sigma}: {closed} vs {half}");
    }
    let mut radius_err: f64 = 0.0;
    let mut at_radius: f64 = 0.0;
    for _ in 0..1000 {
        let p: f64 = rng.random_range(0.501..0.9999);
        let sigma = rng.random_range(0.1..3.0);
        match hier_gaussian_max_radius(p, sigma, DeltaValue::zero()).unwrap() {
            Radius::Finite(r) => {
                let want = sigma * std_normal_quantile(p).unwrap();
                radius_err = radius_err.max((r - want).abs());
                ensure!((r - want).abs() <= 1e-9, "radius p={p} sigma={sigma}: {r} vs {want}");
            }
            Radius::Unbounded => return Err(format!("unbounded radius at p={p}")),
        }
        let d = delta_uniform(rng.random_range(0.8..1.0), rng.random_range(1..4)).unwrap();
        if let Radius::Finite(r) = hier_gaussian_max_radius(p, sigma, d).unwrap() {
            if r > 0.0 {
                let b = hier_gaussian_lower(p, r, sigma, d).unwrap();
                at_radius = at_radius.max((b - 0.5).abs());
                ensure!((b - 0.5).abs() <= 1e-8, "bound at max radius p={p} delta={}: {b}", d.delta);
            }
        }
    }
    Ok(format!("halfspace err {worst:.1e}, radius err {radius_err:.1e}, bound at radius err {at_radius:.1e}"))
}

fn statistics() -> Outcome {
    let start = Instant::now();
    for n in [1u64, 7, 100, 1000] {
        for alpha in [0.001, 0.01, 0.05] {
            ensure!(clopper_pearson_lower(0, n, alpha).unwrap() == 0.0, "lower(0, {n})");
            let top = clopper_pearson_lower(n, n, alpha).unwrap();
            ensure!((top - alpha.powf(1.0 / n as f64)).abs() <= 1e-10, "lower({n}, {n}, {alpha}) = {top}");
            ensure!(clopper_pearson_upper(n, n, alpha).unwrap() == 1.0, "upper({n}, {n})");
        }
    }
    let (p, n, alpha, trials) = (0.7, 1000u64, 0.05, 10_000);
    let bin = Binomial::new(n, p).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut low_miss, mut high_miss) = (0usize, 0usize);
    for _ in 0..trials {
        let k = bin.sample(&mut rng);
        low_miss += usize::from(clopper_pearson_lower(k, n, alpha).unwrap() > p);
        high_miss += usize::from(clopper_pearson_upper(k, n, alpha).unwrap() < p);
    }
    let (lo, hi) = (low_miss as f64 / trials as f64, high_miss as f64 / trials as f64);
    ensure!(lo <= 0.0565 && hi <= 0.0565, "violation rates lower {lo} upper {hi}");
    let took = within_time(start, Duration::from_secs(30), "statistics")?;
    Ok(format!("violation rate lower {lo}, upper {hi} in {took:.1?}"))
}

struct SoundnessRuns {
    certified: usize,
    /// Runs whose confidence bound exceeded the exact vote probability.
    exceed: usize,
    /// Verdicts certified by Monte Carlo but rejected at the exact probability.
    unsound: Vec<String>,
}

fn soundness_runs(alpha: f64) -> Result<SoundnessRuns, String> {
    let x = FeatureMatrix::new(3, 2, Domain::Real, vec![0.3, -1.0, 2.0, 0.5, 0.0, 1.5]).unwrap();
    let config = SmoothingConfig::uniform(0.9, LowerLevel::Gaussian { sigma: 1.0 });
    let threats = continuous_grid(&[1, 2, 3], &[0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0]);
    let params = CertifyParams { alpha, ..Default::default() };
    let qs = [0.6, 0.75, 0.9, 0.97, 0.995];
    let mut out = SoundnessRuns { certified: 0, exceed: 0, unsound: Vec::new() };
    for run in 0..1000u64 {
        let coin = Coin::binary(qs[run as usize % qs.len()], run).unwrap();
        let rec = certify_input(&coin, "x", &x, &config, &threats, &params, RngStream::new(99, run))
            .map_err(|e| e.to_string())?;
        let Some(class) = rec.predicted.class() else { continue };
        let q = coin.exact_vote_probability(&x, &config, class).map_err(|e| e.to_string())?;
        out.exceed += usize::from(rec.p_lower > q);
        for v in &rec.verdicts {
            let exact = q > 0.5 && certify_ball(q, None, &config, &v.threat).unwrap().certified;
            if v.certified && !exact {
                out.unsound.push(format!("run {run} {} q={q} p_lower={}", v.threat, rec.p_lower));
            }
            out.certified += usize::from(v.certified);
        }
    }
    Ok(out)
}

// Each run is sound with probability 1 - alpha, so "no unsound run among
// 1000" is asserted at alpha = 1e-5 (at most 1% chance of any failure over
// all runs). At the default alpha = 0.01 about ten runs are expected to have
// p_lower > q; that count is checked against the binomial tail instead.
fn monte_carlo_soundness() -> Outcome {
    let start = Instant::now();
    let strict = soundness_runs(1e-5)?;
    ensure!(strict.unsound.is_empty(), "alpha=1e-5: {} unsound verdicts, first {}", strict.unsound.len(), strict.unsound[0]);
    ensure!(strict.exceed == 0, "alpha=1e-5: {} runs with p_lower > q", strict.exceed);
    let default = soundness_runs(0.01)?;
    // P(Bin(1000, 0.01) > 22) < 3e-4.
    ensure!(default.exceed <= 22, "alpha=0.01: {} runs with p_lower > q", default.exceed);
    let took = within_time(start, Duration::from_secs(600), "soundness runs")?;
    Ok(format!(
        "alpha=1e-5: {} certified verdicts, none unsound; alpha=0.01: {} runs with p_lower > q, {} unsound verdicts; {took:.1?}",
        strict.certified,
        default.exceed,
        default.unsound.len()
    ))
}

fn sweep_spec(method: Method, family: LowerFamily, threats: Vec<ThreatModel>) -> SweepSpec {
    SweepSpec {
        method,
        family,
        p: ParamRange::Values { values: vec![0.5, 0.7, 0.85, 1.0] },
        sigma: ParamRange::Values { values: vec![0.25, 0.5, 1.0] },
        p_plus: ParamRange::Values { values: vec![0.0, 0.02] },
        p_minus: ParamRange::Values { values: vec![0.6, 0.9] },
        include_ablation: true,
        sampling: Sampling::Grid,
        threats,
        params: CertifyParams { n0: 100, n1: 2000, ..Default::default() },
        repeats: 1,
        seed: 2024,
    }
}

fn pareto_case(domain: Domain, family: LowerFamily, threats: Vec<ThreatModel>) -> Result<usize, String> {
    let data = make_synthetic_dataset(&SyntheticSpec { domain, n_train: 120, n_test: 40, seed: 1, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let clf = Centroid::fit_extended(&data.train, 0.25).map_err(|e| e.to_string())?;
    let run = |m| run_sweep(&sweep_spec(m, family, threats.clone()), &clf, &data.test).map_err(|e| e.to_string());
    let (hier, lower, abl) = (run(Method::Hierarchical)?, run(Method::LowerOnly)?, run(Method::AblationOnly)?);
    let same = |a: &TrialResult, b: &TrialResult| {
        a.clean_accuracy == b.clean_accuracy && a.certified_accuracy == b.certified_accuracy
    };
    for base in lower.iter().chain(&abl) {
        let twin = hier.iter().find(|h| h.config == base.config).ok_or("reduction trial missing")?;
        ensure!(same(twin, base), "trial {:?} differs from its baseline", base.config);
    }
    for k in 0..threats.len() {
        let hf = pareto_front(&points_at(&hier, k));
        ensure!(weakly_dominates(&hf, &pareto_front(&points_at(&lower, k))), "lower-only front not dominated at {}", threats[k]);
        ensure!(weakly_dominates(&hf, &pareto_front(&points_at(&abl, k))), "ablation-only front not dominated at {}", threats[k]);
    }
    Ok(hier.len())
}

fn pareto_superset() -> Outcome {
    let g = pareto_case(Domain::Real, LowerFamily::Gaussian, continuous_grid(&[1, 2], &[0.25, 1.0]))?;
    let s = pareto_case(Domain::Binary, LowerFamily::Sparse, discrete_grid(&[1, 2], &[0, 1], &[1, 2]))?;
    Ok(format!("gaussian sweep {g} trials, sparse sweep {s} trials; baselines reproduced exactly and dominated"))
}

fn hiersmooth(workers: usize, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hiersmooth"))
        .args(args)
        .env("HIERSMOOTH_WORKERS", workers.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "hiersmooth {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    Ok(())
}

fn dir_contents(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    Ok(files)
}

fn write_split(dir: &Path, name: &str, samples: &[Sample]) -> String {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, samples).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, buf).unwrap();
    path.display().to_string()
}

fn determinism() -> Outcome {
    let tmp = std::env::temp_dir().join(format!("hiersmooth-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).map_err(|e| e.to_string())?;
    let data = make_synthetic_dataset(&SyntheticSpec { n_train: 80, n_test: 30, seed: 7, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let test = write_split(&tmp, "test.jsonl", &data.test);
    let train = write_split(&tmp, "train.jsonl", &data.train);
    let common = ["--dataset", &test, "--train", &train, "--seed", "17", "--set", "lower=sparse", "--set", "threat=flip",
        "--set", "r=1,2", "--set", "r_a=0,1", "--set", "r_d=1", "--set", "n0=100", "--set", "n1=1000"];
    let mut outputs = Vec::new();
    for (cmd, extra) in [("certify", vec![]), ("sweep", vec!["--set", "sweep_p=0.7,1"])] {
        let mut per_cmd = Vec::new();
        for (i, workers) in [1usize, 8, 1, 8].into_iter().enumerate() {
            let out = tmp.join(format!("{cmd}-{i}"));
            let out_s = out.display().to_string();
            let mut args = vec![cmd];
            args.extend(common);
            args.extend(&extra);
            args.extend(["--out", &out_s]);
            hiersmooth(workers, &args)?;
            per_cmd.push(dir_contents(&out)?);
        }
        ensure!(per_cmd[0].len() >= 3, "{cmd} wrote only {:?}", per_cmd[0].iter().map(|f| &f.0).collect::<Vec<_>>());
        for (i, other) in per_cmd.iter().enumerate().skip(1) {
            ensure!(other == &per_cmd[0], "{cmd} run {i} differs from run 0");
        }
        outputs.push(format!("{cmd}: {} files", per_cmd[0].len()));
    }
    let _ = std::fs::remove_dir_all(&tmp);
    Ok(format!("{} identical at 1 and 8 workers", outputs.join(", ")))
}

fn monotonicity() -> Outcome {
    const TOL: f64 = 1e-12;
    const N: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checks = 0usize;
    let mut check = |ok: bool, what: String| -> Result<(), String> {
        checks += 1;
        ensure!(ok, "{what}");
        Ok(())
    };
    for _ in 0..N {
        let p_sel = rng.random_range(0.3..1.0);
        let r = rng.random_range(1..4);
        let (d, d_next) = (delta_uniform(p_sel, r).unwrap(), delta_uniform(p_sel, r + 1).unwrap());
        let (p1, p2) = {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            (a.min(b), a.max(b))
        };
        let sigma = rng.random_range(0.1..2.0);
        let (e1, e2) = {
            let (a, b) = (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0));
            (f64::min(a, b), f64::max(a, b))
        };
        let gl = |p, e, d| hier_gaussian_lower(p, e, sigma, d).unwrap();
        let gu = |p, e, d| hier_gaussian_upper(p, e, sigma, d).unwrap();
        let tag = format!("p_sel={p_sel} r={r} p=({p1},{p2}) eps=({e1},{e2}) sigma={sigma}");
        check(gl(p1, e1, d) <= gl(p2, e1, d) + TOL, format!("gaussian lower in p: {tag}"))?;
        check(gl(p1, e2, d) <= gl(p1, e1, d) + TOL, format!("gaussian lower in eps: {tag}"))?;
        check(gl(p1, e1, d_next) <= gl(p1, e1, d) + TOL, format!("gaussian lower in r: {tag}"))?;
        check(gu(p1, e1, d) <= gu(p2, e1, d) + TOL, format!("gaussian upper in p: {tag}"))?;
        check(gu(p1, e1, d) <= gu(p1, e2, d) + TOL, format!("gaussian upper in eps: {tag}"))?;
        check(gu(p1, e1, d) <= gu(p1, e1, d_next) + TOL, format!("gaussian upper in r: {tag}"))?;
        check(gl(p1, e1, d) <= p1 + TOL && p1 <= gu(p1, e1, d) + TOL, format!("gaussian sandwich: {tag}"))?;
        check(ablation_lower(p1, d) <= ablation_lower(p2, d) + TOL, format!("ablation lower in p: {tag}"))?;
        check(ablation_lower(p1, d_next) <= ablation_lower(p1, d) + TOL, format!("ablation lower in r: {tag}"))?;
        check(ablation_upper(p1, d) <= ablation_upper(p1, d_next) + TOL, format!("ablation upper in r: {tag}"))?;

        let (ra, rd) = (rng.random_range(0..5), rng.random_range(0..5));
        let (pp, pm) = (rng.random_range(0.0..0.5), rng.random_range(0.3..1.0));
        let t = sparse_regions(ra, rd, pp, pm).unwrap();
        let ta = sparse_regions(ra + 1, rd, pp, pm).unwrap();
        let td = sparse_regions(ra, rd + 1, pp, pm).unwrap();
        let tag = format!("{tag} r_a={ra} r_d={rd} p_plus={pp} p_minus={pm}");
        let dl = |p, d, t: &_| hier_discrete_lower(p, d, t);
        let du = |p, d, t: &_| hier_discrete_upper(p, d, t);
        check(dl(p1, d, &t) <= dl(p2, d, &t) + TOL, format!("discrete lower in p: {tag}"))?;
        check(dl(p1, d, &ta) <= dl(p1, d, &t) + TOL, format!("discrete lower in r_a: {tag}"))?;
        check(dl(p1, d, &td) <= dl(p1, d, &t) + TOL, format!("discrete lower in r_d: {tag}"))?;
        check(dl(p1, d_next, &t) <= dl(p1, d, &t) + TOL, format!("discrete lower in r: {tag}"))?;
        check(du(p1, d, &t) <= du(p2, d, &t) + TOL, format!("discrete upper in p: {tag}"))?;
        check(du(p1, d, &t) <= du(p1, d, &ta) + TOL, format!("discrete upper in r_a: {tag}"))?;
        check(du(p1, d, &t) <= du(p1, d, &td) + TOL, format!("discrete upper in r_d: {tag}"))?;
        check(du(p1, d, &t) <= du(p1, d_next, &t) + TOL, format!("discrete upper in r: {tag}"))?;
        check(dl(p1, d, &t) <= p1 + TOL && p1 <= du(p1, d, &t) + TOL, format!("discrete sandwich: {tag}"))?;
    }
    Ok(format!("{N} tuples, {checks} comparisons, no violations"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("region accounting", region_accounting),
        ("special-case reductions", special_cases),
        ("gaussian closed form", gaussian_closed_form),
        ("statistical machinery", statistics),
        ("monte-carlo soundness", monte_carlo_soundness),
        ("pareto superset", pareto_superset),
        ("determinism", determinism),
        ("monotonicity", monotonicity),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({took:.1?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({took:.1?}): {why}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
