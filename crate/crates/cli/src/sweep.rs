//! `hiersmooth sweep`: evaluate a parameter sweep and mark its Pareto front.
//!
//! Each completed trial is appended to `trials.progress.jsonl`; rerunning the
//! same command after an interruption skips those trials. Once every trial is
//! done the final `trials.jsonl`, `trials.csv` and `pareto.csv` are written and
//! the progress journal is removed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use hiersmooth_core::sweep::{mark_dominated, points_at, run_sweep_resumable, ParetoPoint, TrialResult};
use hiersmooth_core::{LowerLevel, Selection, SmoothingConfig, ThreatModel};
use serde::{Deserialize, Serialize};

use crate::output::{create_dir, csv_bytes, fmt_prob, load_inputs, write_atomic};
use crate::{resolve, CliError, SweepArgs};

pub const PROGRESS_FILE: &str = "trials.progress.jsonl";

/// One line of `trials.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLine {
    #[serde(flatten)]
    pub result: TrialResult,
    pub threats: Vec<ThreatModel>,
}

pub const PARAM_COLUMNS: [&str; 5] = ["p", "lower", "sigma", "p_plus", "p_minus"];

pub fn param_cells(config: &SmoothingConfig) -> Vec<String> {
    let p = match &config.selection {
        Selection::Uniform { p } => p.to_string(),
        Selection::PerRow { ps } => ps.iter().map(f64::to_string).collect::<Vec<_>>().join(" "),
    };
    let (sigma, p_plus, p_minus) = match config.lower {
        LowerLevel::Gaussian { sigma } => (sigma.to_string(), String::new(), String::new()),
        LowerLevel::SparseFlip { p_plus, p_minus } => (String::new(), p_plus.to_string(), p_minus.to_string()),
        LowerLevel::Ablation => Default::default(),
    };
    vec![p, config.lower.name().to_string(), sigma, p_plus, p_minus]
}

fn header(prefix: &[&'static str], suffix: &[&'static str]) -> Vec<&'static str> {
    prefix.iter().chain(&PARAM_COLUMNS).chain(suffix).copied().collect()
}

pub fn trials_csv(lines: &[TrialLine]) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    for l in lines {
        for (t, acc) in l.threats.iter().zip(&l.result.certified_accuracy) {
            let mut row = vec![l.result.trial_id.to_string(), l.result.method.to_string()];
            row.extend(param_cells(&l.result.config));
            row.extend([t.to_string(), fmt_prob(l.result.clean_accuracy), fmt_prob(*acc)]);
            rows.push(row);
        }
    }
    csv_bytes(&header(&["trial_id", "method"], &["radius_spec", "clean_acc", "cert_acc"]), &rows)
}

pub fn point_row(threat: &ThreatModel, p: &ParetoPoint, dominated: bool) -> Vec<String> {
    let mut row = vec![threat.to_string(), p.trial_id.to_string(), p.method.to_string()];
    row.extend(param_cells(&p.config));
    row.extend([fmt_prob(p.clean_accuracy), fmt_prob(p.certified_accuracy)]);
    if dominated {
        row.push(p.dominated.to_string());
    }
    row
}

pub fn pareto_csv(results: &[TrialResult], threats: &[ThreatModel]) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    for (k, t) in threats.iter().enumerate() {
        for p in mark_dominated(&points_at(results, k)) {
            rows.push(point_row(t, &p, true));
        }
    }
    csv_bytes(&header(&["radius_spec", "trial_id", "method"], &["clean_acc", "cert_acc", "dominated"]), &rows)
}

fn jsonl(lines: &[TrialLine]) -> Result<String, CliError> {
    let mut out = String::new();
    for l in lines {
        out.push_str(&serde_json::to_string(l).map_err(|e| CliError::failure(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

/// Completed trials from an earlier run. A torn final line is dropped.
fn read_progress(path: &Path) -> Result<Vec<TrialLine>, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::data(format!("cannot read `{}`: {e}", path.display()))),
    };
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        match serde_json::from_str::<TrialLine>(line) {
            Ok(l) => out.push(l),
            Err(_) if i + 1 == lines.len() && !text.ends_with('\n') => {}
            Err(e) => return Err(CliError::data(format!("`{}` line {}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = resolve(&args.run)?;
    let spec = cfg.sweep_spec()?;
    let out = cfg.path("out")?;
    let trials = spec.trials().map_err(CliError::from_config)?;
    if trials.is_empty() {
        return Err(CliError::config("sweep has no trials: every parameter range is empty"));
    }
    let (samples, clf) = load_inputs(&cfg)?;

    create_dir(&out)?;
    let progress_path = out.join(PROGRESS_FILE);
    let resolved_path = out.join("config.resolved");
    let resolved = cfg.resolved();
    if args.fresh {
        let _ = std::fs::remove_file(&progress_path);
    }
    let previous = read_progress(&progress_path)?;
    if !previous.is_empty() {
        let old = std::fs::read_to_string(&resolved_path).unwrap_or_default();
        if old != resolved {
            return Err(CliError::config(format!(
                "`{}` holds progress from a different configuration; rerun with --fresh",
                out.display()
            )));
        }
    }
    let mut completed = BTreeMap::new();
    for l in previous {
        if l.threats != spec.threats {
            return Err(CliError::config("progress journal uses a different threat grid; rerun with --fresh"));
        }
        completed.insert(l.result.trial_id, l);
    }
    let kept: Vec<TrialLine> = completed.values().cloned().collect();
    write_atomic(&progress_path, jsonl(&kept)?.as_bytes())?;
    write_atomic(&resolved_path, resolved.as_bytes())?;
    if !completed.is_empty() {
        eprintln!("resuming: {} of {} trials already complete", completed.len(), trials.len());
    }

    let journal = std::fs::OpenOptions::new()
        .append(true)
        .open(&progress_path)
        .map_err(|e| CliError::failure(format!("cannot open `{}`: {e}", progress_path.display())))?;
    let journal = Mutex::new(journal);
    let done: BTreeMap<usize, TrialResult> = completed.into_iter().map(|(k, l)| (k, l.result)).collect();
    let results = run_sweep_resumable(&spec, clf.as_ref(), &samples, &done, |r| {
        let line = TrialLine { result: r.clone(), threats: spec.threats.clone() };
        let text = serde_json::to_string(&line).map_err(|e| hiersmooth_core::Error::Io(e.into()))?;
        let mut f = journal.lock().expect("journal lock");
        writeln!(f, "{text}")?;
        f.flush()?;
        Ok(())
    })
    .map_err(CliError::from_run)?;

    let lines: Vec<TrialLine> =
        results.iter().map(|r| TrialLine { result: r.clone(), threats: spec.threats.clone() }).collect();
    write_atomic(&out.join("trials.jsonl"), jsonl(&lines)?.as_bytes())?;
    write_atomic(&out.join("trials.csv"), &trials_csv(&lines)?)?;
    write_atomic(&out.join("pareto.csv"), &pareto_csv(&results, &spec.threats)?)?;
    std::fs::remove_file(&progress_path)
        .map_err(|e| CliError::failure(format!("cannot remove `{}`: {e}", progress_path.display())))?;

    println!("{} trials ({})", results.len(), spec.method);
    for (k, t) in spec.threats.iter().enumerate() {
        let marked = mark_dominated(&points_at(&results, k));
        let front = marked.iter().filter(|p| !p.dominated).count();
        println!("  {t:<24} front size {front}");
    }
    println!("wrote {}", out.display());
    Ok(())
}
