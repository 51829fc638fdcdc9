//! Effective dimension of a feature matrix: the number of leading principal
//! directions needed to capture a given fraction of the total variance.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.99;

/// `n x D` real features, optionally with the labels column that came with them.
#[derive(Clone, Debug)]
pub struct FeatureMatrix {
    values: DMatrix<f64>,
    columns: Vec<String>,
    labels: Option<Vec<String>>,
}

impl FeatureMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let columns = (0..values.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_columns(values, columns, None)
    }

    fn with_columns(values: DMatrix<f64>, columns: Vec<String>, labels: Option<Vec<String>>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::domain(format!("need at least two rows, got {}", values.nrows())));
        }
        if values.ncols() < 1 {
            return Err(Error::domain("need at least one feature column"));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (i, j) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::domain(format!("non-finite value at row {i}, column {j}")));
        }
        Ok(FeatureMatrix { values, columns, labels })
    }

    /// Reads delimiter-separated text with a one-line header. `.tsv` files are
    /// tab-separated, anything else comma-separated.
    pub fn from_path(path: &Path, labels_col: Option<&str>) -> Result<Self> {
        let delimiter = match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") => b'\t',
            _ => b',',
        };
        let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_reader(file, delimiter, labels_col)
    }

    pub fn from_reader<R: std::io::Read>(reader: R, delimiter: u8, labels_col: Option<&str>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let label_idx = match labels_col {
            Some(name) => Some(
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::Config(format!("labels column `{name}` not in header {header:?}")))?,
            ),
            None => None,
        };
        let columns: Vec<String> =
            header.iter().enumerate().filter(|(j, _)| Some(*j) != label_idx).map(|(_, h)| h.clone()).collect();

        let mut flat = Vec::new();
        let mut labels = Vec::new();
        let mut rows = 0;
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            for (j, field) in record.iter().enumerate() {
                if Some(j) == label_idx {
                    labels.push(field.to_owned());
                    continue;
                }
                let v: f64 = field.parse().map_err(|_| {
                    Error::domain(format!("row {}, column `{}`: `{field}` is not a number", i + 1, header[j]))
                })?;
                flat.push(v);
            }
            rows += 1;
        }
        let values = DMatrix::from_row_slice(rows, columns.len(), &flat);
        Self::with_columns(values, columns, label_idx.map(|_| labels))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// Covariance eigenvalues, descending, clipped at zero.
    pub eigenvalues: Vec<f64>,
    pub cumulative_variance_fraction: Vec<f64>,
    pub effective_dim: usize,
    pub threshold: f64,
    pub n: usize,
}

pub fn effective_dim(features: &FeatureMatrix, threshold: f64) -> Result<SpectrumReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::domain(format!("threshold must lie in (0, 1], got {threshold}")));
    }
    let x = features.values();
    let (n, dim) = x.shape();

    let mut centered = x.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.sum() / n as f64;
        col.add_scalar_mut(-mean);
        // second pass removes what rounding left of the mean
        let resid = col.sum() / n as f64;
        col.add_scalar_mut(-resid);
    }
    // the nonzero spectrum is shared by X^T X and X X^T; use the smaller one
    let gram = if dim <= n { centered.tr_mul(&centered) } else { &centered * centered.transpose() } / (n as f64 - 1.0);
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    eigenvalues.resize(dim, 0.0);

    let total: f64 = eigenvalues.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("all rows are identical; the covariance is zero".into()));
    }
    let mut acc = 0.0;
    let mut cumulative_variance_fraction: Vec<f64> = eigenvalues
        .iter()
        .map(|v| {
            acc += v;
            (acc / total).min(1.0)
        })
        .collect();
    *cumulative_variance_fraction.last_mut().expect("dim >= 1") = 1.0;
    let effective_dim =
        cumulative_variance_fraction.iter().position(|&c| c >= threshold).expect("last fraction is one") + 1;
    Ok(SpectrumReport { eigenvalues, cumulative_variance_fraction, effective_dim, threshold, n })
}
