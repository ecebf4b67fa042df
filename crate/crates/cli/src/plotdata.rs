//! `hiersmooth plotdata`: per-method scatter series and front polylines.
//!
//! For each method `m` writes `scatter_<m>.csv` (every trial, with its
//! dominance flag within the method) and `front_<m>.csv` (the non-dominated
//! points by clean accuracy descending), plus `front_all.csv` holding the
//! front across all inputs. Rows are grouped by threat grid point.

use std::path::{Path, PathBuf};

use hiersmooth_core::sweep::{mark_dominated, points_at, Method, ParetoPoint, TrialResult};
use hiersmooth_core::ThreatModel;

use crate::output::{create_dir, csv_bytes, write_atomic};
use crate::settings::VERSION;
use crate::sweep::{point_row, TrialLine, PARAM_COLUMNS};
use crate::{CliError, PlotArgs};

fn read_lines(input: &Path) -> Result<Vec<TrialLine>, CliError> {
    let path: PathBuf = if input.is_dir() { input.join("trials.jsonl") } else { input.to_path_buf() };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::data(format!("cannot read sweep results `{}`: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::data(format!("`{}` line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn header(dominated: bool) -> Vec<&'static str> {
    let mut h = vec!["radius_spec", "trial_id", "method"];
    h.extend(PARAM_COLUMNS);
    h.extend(["clean_acc", "cert_acc"]);
    if dominated {
        h.push("dominated");
    }
    h
}

/// Marked points per threat grid point.
fn series(results: &[TrialResult], threats: &[ThreatModel]) -> Vec<(ThreatModel, Vec<ParetoPoint>)> {
    threats.iter().enumerate().map(|(k, t)| (*t, mark_dominated(&points_at(results, k)))).collect()
}

fn rows(series: &[(ThreatModel, Vec<ParetoPoint>)], front_only: bool) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for (t, points) in series {
        for p in points.iter().filter(|p| !(front_only && p.dominated)) {
            out.push(point_row(t, p, !front_only));
        }
    }
    out
}

pub fn run(a: &PlotArgs) -> Result<(), CliError> {
    let mut lines = Vec::new();
    for input in &a.inputs {
        lines.extend(read_lines(input)?);
    }
    let threats: Vec<ThreatModel> = lines.first().map(|l| l.threats.clone()).unwrap_or_default();
    if let Some(l) = lines.iter().find(|l| l.threats != threats) {
        return Err(CliError::data(format!(
            "trial {} ({}) uses a different threat grid from the first input",
            l.result.trial_id, l.result.method
        )));
    }
    let all: Vec<TrialResult> = lines.into_iter().map(|l| l.result).collect();

    create_dir(&a.out)?;
    for method in Method::all() {
        let mine: Vec<TrialResult> = all.iter().filter(|r| r.method == method).cloned().collect();
        let s = series(&mine, &threats);
        write_atomic(&a.out.join(format!("scatter_{method}.csv")), &csv_bytes(&header(true), &rows(&s, false))?)?;
        write_atomic(&a.out.join(format!("front_{method}.csv")), &csv_bytes(&header(false), &rows(&s, true))?)?;
    }
    let combined = series(&all, &threats);
    write_atomic(&a.out.join("front_all.csv"), &csv_bytes(&header(false), &rows(&combined, true))?)?;
    let inputs: Vec<String> = a.inputs.iter().map(|p| p.display().to_string()).collect();
    write_atomic(
        &a.out.join("config.resolved"),
        format!("version = {VERSION}\ninputs = {}\n", inputs.join(",")).as_bytes(),
    )?;
    println!("{} trials from {} input(s); wrote {}", all.len(), a.inputs.len(), a.out.display());
    Ok(())
}
