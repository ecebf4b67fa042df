//! Output helpers: atomic file writes, number formatting, dataset loading.

use std::io::Write;
use std::path::Path;

use hiersmooth_core::dataset::{read_jsonl, Sample};
use hiersmooth_core::harness::{build_classifier, BaseClassifier};
use hiersmooth_core::Error;

use crate::settings::RunConfig;
use crate::CliError;

/// Probabilities and accuracies go to CSV with 12 significant digits.
pub fn fmt_prob(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::failure(format!("cannot create output directory `{}`: {e}", dir.display())))
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::failure(format!("cannot write `{}`: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// Serialize CSV rows into memory.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::failure(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::failure(format!("csv encoding failed: {e}")))
}

pub fn write_resolved(dir: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    write_atomic(&dir.join("config.resolved"), cfg.resolved().as_bytes())
}

pub fn load_samples(path: &Path, what: &str) -> Result<Vec<Sample>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::data(format!("cannot read {what} `{}`: {e}", path.display())))?;
    let samples = read_jsonl(std::io::BufReader::new(file))
        .map_err(|e| CliError::data(format!("{what} `{}`: {e}", path.display())))?;
    if samples.is_empty() {
        return Err(CliError::data(format!("{what} `{}` holds no samples", path.display())));
    }
    Ok(samples)
}

/// Load the evaluation set and build the configured classifier.
pub fn load_inputs(cfg: &RunConfig) -> Result<(Vec<Sample>, Box<dyn BaseClassifier>), CliError> {
    let name = cfg.classifier()?.to_string();
    let samples = load_samples(&cfg.path("dataset")?, "dataset")?;
    let train = match cfg.optional_path("train") {
        Some(p) => Some(load_samples(&p, "training set")?),
        None => None,
    };
    let clf = build_classifier(&name, train.as_deref()).map_err(|e| match e {
        Error::Dimension(_) => CliError::data(format!("training set: {e}")),
        e => CliError::config(e.to_string()),
    })?;
    let max_label = samples.iter().map(|s| s.label).max().unwrap_or(0);
    if max_label >= clf.n_classes() {
        return Err(CliError::data(format!(
            "dataset label {max_label} exceeds the classifier's {} classes",
            clf.n_classes()
        )));
    }
    Ok((samples, clf))
}
