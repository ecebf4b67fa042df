//! Newline-delimited JSON datasets.
//!
//! One object per line:
//! `{"id": "...", "label": 0, "n_rows": 2, "n_cols": 3, "domain": "binary", "values": [...]}`
//! with `values` in row-major order. Binary values are written as integers.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::{Domain, FeatureMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub label: usize,
    pub x: FeatureMatrix,
}

#[derive(Deserialize, Serialize)]
struct RawSample {
    id: String,
    label: usize,
    n_rows: usize,
    n_cols: usize,
    domain: Domain,
    values: Vec<f64>,
}

impl Sample {
    pub fn to_json(&self) -> Value {
        let values: Vec<Value> = match self.x.domain() {
            Domain::Binary => self.x.values().iter().map(|v| json!(*v as u8)).collect(),
            Domain::Real => self.x.values().iter().map(|v| json!(*v)).collect(),
        };
        json!({
            "id": self.id,
            "label": self.label,
            "n_rows": self.x.n_rows(),
            "n_cols": self.x.n_cols(),
            "domain": self.x.domain(),
            "values": values,
        })
    }

    pub fn from_json_line(line: &str, line_no: usize) -> Result<Self> {
        let raw: RawSample = serde_json::from_str(line)
            .map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        let x = FeatureMatrix::new(raw.n_rows, raw.n_cols, raw.domain, raw.values)
            .map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        Ok(Sample { id: raw.id, label: raw.label, x })
    }
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(Sample::from_json_line(&line, i + 1)?);
    }
    Ok(out)
}

pub fn write_jsonl<W: Write>(mut writer: W, samples: &[Sample]) -> Result<()> {
    for s in samples {
        serde_json::to_writer(&mut writer, &s.to_json()).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl_file(path: &std::path::Path) -> Result<Vec<Sample>> {
    let f = std::fs::File::open(path)?;
    read_jsonl(std::io::BufReader::new(f))
}

/// Number of classes implied by the labels (max label + 1).
pub fn n_classes(samples: &[Sample]) -> usize {
    samples.iter().map(|s| s.label + 1).max().unwrap_or(0)
}
