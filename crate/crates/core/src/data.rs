//! Dataset container, CSV ingestion, and residual vectors.

use std::path::Path;

use crate::error::{Error, Result};

/// Smallest sample the unbiased distance-covariance estimator accepts.
pub const MIN_SAMPLES: usize = 4;

/// `n` observations of a scalar response and a `p`-dimensional covariate.
///
/// Covariates are stored row-major, so `x_row(i)` is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    x: Vec<f64>,
    n: usize,
    p: usize,
}

impl Dataset {
    /// Build from a response vector and a row-major covariate buffer of
    /// length `y.len() * p`.
    pub fn from_flat(y: Vec<f64>, x: Vec<f64>, p: usize) -> Result<Self> {
        let n = y.len();
        if p == 0 {
            return Err(Error::Config("covariate dimension p must be at least 1".into()));
        }
        if x.len() != n * p {
            return Err(Error::Dimension(format!(
                "covariate buffer has {} entries, expected n*p = {}*{}",
                x.len(),
                n,
                p
            )));
        }
        if n < MIN_SAMPLES {
            return Err(Error::Size(format!(
                "dataset has {n} rows; at least {MIN_SAMPLES} are required"
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("response at row {i} is not finite")));
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "covariate {} at row {} is not finite",
                k % p,
                k / p
            )));
        }
        Ok(Self { y, x, n, p })
    }

    pub fn from_rows(y: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.len() != y.len() {
            return Err(Error::Dimension(format!(
                "{} covariate rows for {} responses",
                rows.len(),
                y.len()
            )));
        }
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Dimension("covariate rows have unequal lengths".into()));
        }
        Self::from_flat(y, rows.concat(), p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Row-major covariate buffer.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    /// Same covariates, new responses. Used by the bootstrap.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        if y.len() != self.n {
            return Err(Error::Dimension(format!(
                "response has length {}, dataset has n = {}",
                y.len(),
                self.n
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("response at row {i} is not finite")));
        }
        Ok(Self {
            y,
            x: self.x.clone(),
            n: self.n,
            p: self.p,
        })
    }

    /// Write as CSV with the given header names. Values use Rust's
    /// shortest round-trip formatting, so reloading is lossless.
    pub fn write_csv(&self, path: impl AsRef<Path>, y_name: &str, x_names: &[&str]) -> Result<()> {
        if x_names.len() != self.p {
            return Err(Error::Dimension(format!(
                "{} covariate names for p = {}",
                x_names.len(),
                self.p
            )));
        }
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec![y_name.to_string()];
        header.extend(x_names.iter().map(|s| s.to_string()));
        w.write_record(&header)?;
        for i in 0..self.n {
            let mut rec = vec![self.y[i].to_string()];
            rec.extend(self.x_row(i).iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Read a headed CSV file, picking the response and covariate columns by
/// name. Rows keep file order; reported row numbers are 1-based data rows.
pub fn load_dataset(path: impl AsRef<Path>, y_column: &str, x_columns: &[&str]) -> Result<Dataset> {
    if x_columns.is_empty() {
        return Err(Error::Config("at least one covariate column is required".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let locate = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("column '{name}' not found in header")))
    };
    let y_idx = locate(y_column)?;
    let x_idx = x_columns.iter().map(|c| locate(c)).collect::<Result<Vec<_>>>()?;

    let mut y = Vec::new();
    let mut x = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |idx: usize, name: &str| -> Result<f64> {
            let raw = record.get(idx).ok_or_else(|| Error::Data {
                row: row + 1,
                column: name.to_string(),
                reason: "missing cell".into(),
            })?;
            let value: f64 = raw.parse().map_err(|_| Error::Data {
                row: row + 1,
                column: name.to_string(),
                reason: format!("cannot parse '{raw}' as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Data {
                    row: row + 1,
                    column: name.to_string(),
                    reason: format!("non-finite value '{raw}'"),
                });
            }
            Ok(value)
        };
        y.push(cell(y_idx, y_column)?);
        for (&idx, name) in x_idx.iter().zip(x_columns) {
            x.push(cell(idx, name)?);
        }
    }
    Dataset::from_flat(y, x, x_columns.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    /// (Y - m̂(X)) / σ(X, θ̂)
    RawEtaHat,
    Standardized,
    BootstrapStar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    pub values: Vec<f64>,
    pub kind: ResidualKind,
}

impl ResidualSet {
    pub fn new(values: Vec<f64>, kind: ResidualKind) -> Self {
        Self { values, kind }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Center and scale to mean 0 and 1/n-variance 1.
pub fn standardize_residuals(r: &ResidualSet) -> Result<ResidualSet> {
    let n = r.values.len();
    if n == 0 {
        return Err(Error::DegenerateResiduals);
    }
    let nf = n as f64;
    let mean = r.values.iter().sum::<f64>() / nf;
    let var = r.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::DegenerateResiduals);
    }
    let sd = var.sqrt();
    Ok(ResidualSet::new(
        r.values.iter().map(|v| (v - mean) / sd).collect(),
        ResidualKind::Standardized,
    ))
}
