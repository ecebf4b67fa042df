//! Matrix-valued inputs. Rows are entities, columns are per-entity features.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Binary,
    Real,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Binary => "binary",
            Domain::Real => "real",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "binary" => Ok(Domain::Binary),
            "real" => Ok(Domain::Real),
            other => Err(Error::param(format!("unknown domain `{other}`"))),
        }
    }
}

/// Dense row-major `N x D` matrix over a binary or real domain.
///
/// Binary matrices use the same `f64` storage and are validated to `{0, 1}`
/// on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    domain: Domain,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_rows: usize, n_cols: usize, domain: Domain, values: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::dim(format!("matrix must be non-empty, got {n_rows}x{n_cols}")));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::dim(format!(
                "expected {} values for a {n_rows}x{n_cols} matrix, got {}",
                n_rows * n_cols,
                values.len()
            )));
        }
        match domain {
            Domain::Binary => {
                if let Some(v) = values.iter().find(|v| **v != 0.0 && **v != 1.0) {
                    return Err(Error::domain(format!("binary matrix contains {v}")));
                }
            }
            Domain::Real => {
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return Err(Error::domain(format!("real matrix contains non-finite {v}")));
                }
            }
        }
        Ok(Self { n_rows, n_cols, domain, values })
    }

    pub fn zeros(n_rows: usize, n_cols: usize, domain: Domain) -> Result<Self> {
        Self::new(n_rows, n_cols, domain, vec![0.0; n_rows * n_cols])
    }

    /// Build from nested rows; mostly handy in tests.
    pub fn from_rows(domain: Domain, rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::dim("ragged rows"));
        }
        Self::new(n_rows, n_cols, domain, rows.concat())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    fn check_same_shape(&self, other: &FeatureMatrix) -> Result<()> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::dim(format!(
                "{}x{} vs {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        if self.domain != other.domain {
            return Err(Error::dim(format!(
                "domain {} vs {}",
                self.domain.as_str(),
                other.domain.as_str()
            )));
        }
        Ok(())
    }
}

/// Rows in which two matrices differ, plus the Frobenius norm of their difference.
#[derive(Debug, Clone, PartialEq)]
pub struct RowDistance {
    pub changed_rows: BTreeSet<usize>,
    pub l2: f64,
}

pub fn row_distance(x: &FeatureMatrix, x_tilde: &FeatureMatrix) -> Result<RowDistance> {
    x.check_same_shape(x_tilde)?;
    let mut changed_rows = BTreeSet::new();
    let mut sq = 0.0;
    for i in 0..x.n_rows {
        let mut differs = false;
        for (a, b) in x.row(i).iter().zip(x_tilde.row(i)) {
            if a != b {
                differs = true;
                sq += (a - b) * (a - b);
            }
        }
        if differs {
            changed_rows.insert(i);
        }
    }
    Ok(RowDistance { changed_rows, l2: sq.sqrt() })
}

/// Counts of `0 -> 1` insertions and `1 -> 0` deletions between binary matrices.
pub fn flip_counts(x: &FeatureMatrix, x_tilde: &FeatureMatrix) -> Result<(usize, usize)> {
    x.check_same_shape(x_tilde)?;
    if x.domain != Domain::Binary {
        return Err(Error::domain("flip counts are only defined on binary matrices"));
    }
    let mut additions = 0;
    let mut deletions = 0;
    for (a, b) in x.values.iter().zip(&x_tilde.values) {
        if *a == 0.0 && *b == 1.0 {
            additions += 1;
        } else if *a == 1.0 && *b == 0.0 {
            deletions += 1;
        }
    }
    Ok((additions, deletions))
}

/// A smoothed matrix together with its row-selection indicator.
///
/// The indicator is stored separately but serializes as column `D`. When the
/// lower level ablates rows, a second per-row flag marks the ablated rows and
/// serializes as column `D + 1`; ablated rows hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedMatrix {
    base: FeatureMatrix,
    indicator: Vec<u8>,
    ablated: Option<Vec<bool>>,
}

impl ExtendedMatrix {
    pub fn base(&self) -> &FeatureMatrix {
        &self.base
    }

    pub fn indicator(&self) -> &[u8] {
        &self.indicator
    }

    pub fn ablated(&self) -> Option<&[bool]> {
        self.ablated.as_deref()
    }

    pub fn is_ablated(&self, i: usize) -> bool {
        self.ablated.as_ref().is_some_and(|a| a[i])
    }

    /// Logical width of a serialized row.
    pub fn width(&self) -> usize {
        self.base.n_cols + 1 + usize::from(self.ablated.is_some())
    }

    /// Row `i` as the classifier sees it: features, indicator, and the
    /// ablation flag when present.
    pub fn serialized_row(&self, i: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width());
        out.extend_from_slice(self.base.row(i));
        out.push(f64::from(self.indicator[i]));
        if let Some(a) = &self.ablated {
            out.push(if a[i] { 1.0 } else { 0.0 });
        }
        out
    }

    /// Row-major `N x width()` values.
    pub fn serialize(&self) -> Vec<f64> {
        (0..self.base.n_rows).flat_map(|i| self.serialized_row(i)).collect()
    }

    pub fn split(self) -> (FeatureMatrix, Vec<u8>) {
        (self.base, self.indicator)
    }

    pub(crate) fn with_ablation(mut self, ablated: Vec<bool>) -> Result<Self> {
        if ablated.len() != self.base.n_rows {
            return Err(Error::dim("ablation flags must have one entry per row"));
        }
        self.ablated = Some(ablated);
        Ok(self)
    }
}

/// Append the indicator `tau` as an extra column.
pub fn extend(x: FeatureMatrix, tau: Vec<u8>) -> Result<ExtendedMatrix> {
    if tau.len() != x.n_rows {
        return Err(Error::dim(format!(
            "indicator has length {} but matrix has {} rows",
            tau.len(),
            x.n_rows
        )));
    }
    if let Some(t) = tau.iter().find(|t| **t > 1) {
        return Err(Error::domain(format!("indicator entry {t} is not 0/1")));
    }
    Ok(ExtendedMatrix { base: x, indicator: tau, ablated: None })
}

/// Inverse of [`extend`].
pub fn split(z: ExtendedMatrix) -> (FeatureMatrix, Vec<u8>) {
    z.split()
}
