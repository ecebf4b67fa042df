//! `hiersmooth certify`: Monte-Carlo certification of a labeled dataset.
//!
//! Writes `records.jsonl` (one record per sample, sorted by id), `summary.csv`
//! (one row per sample and threat grid point), `accuracy.csv` and
//! `config.resolved`.

use hiersmooth_core::harness::evaluate_dataset;
use hiersmooth_core::record::CertificateRecord;

use crate::output::{create_dir, csv_bytes, fmt_prob, load_inputs, write_atomic, write_resolved};
use crate::{resolve, CliError, RunArgs};

pub const SUMMARY_HEADER: [&str; 7] =
    ["sample_id", "predicted", "abstained", "p_lower", "delta", "radius_spec", "certified"];

pub fn summary_rows(records: &[CertificateRecord]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for rec in records {
        for v in &rec.verdicts {
            rows.push(vec![
                rec.sample_id.clone(),
                rec.predicted.class().map(|c| c.to_string()).unwrap_or_default(),
                rec.predicted.is_abstain().to_string(),
                fmt_prob(rec.p_lower),
                fmt_prob(v.delta),
                v.threat.to_string(),
                v.certified.to_string(),
            ]);
        }
    }
    rows
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    let config = cfg.smoothing()?;
    let threats = cfg.threats()?;
    let params = cfg.certify_params()?;
    let seed = cfg.seed()?;
    let out = cfg.path("out")?;
    let (samples, clf) = load_inputs(&cfg)?;

    let ev = evaluate_dataset(clf.as_ref(), &samples, &config, &threats, &params, seed).map_err(CliError::from_run)?;

    create_dir(&out)?;
    let mut records = String::new();
    for rec in &ev.records {
        records.push_str(&serde_json::to_string(rec).map_err(|e| CliError::failure(e.to_string()))?);
        records.push('\n');
    }
    write_atomic(&out.join("records.jsonl"), records.as_bytes())?;
    write_atomic(&out.join("summary.csv"), &csv_bytes(&SUMMARY_HEADER, &summary_rows(&ev.records))?)?;
    let acc_rows: Vec<Vec<String>> = threats
        .iter()
        .zip(&ev.certified_accuracy)
        .map(|(t, a)| vec![t.to_string(), fmt_prob(ev.clean_accuracy), fmt_prob(*a)])
        .collect();
    write_atomic(&out.join("accuracy.csv"), &csv_bytes(&["radius_spec", "clean_acc", "cert_acc"], &acc_rows)?)?;
    write_resolved(&out, &cfg)?;

    println!("samples: {}  clean accuracy: {}", samples.len(), fmt_prob(ev.clean_accuracy));
    for (t, a) in threats.iter().zip(&ev.certified_accuracy) {
        println!("  {t:<24} certified accuracy {}", fmt_prob(*a));
    }
    println!("wrote {}", out.display());
    Ok(())
}
