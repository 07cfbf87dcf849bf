//! CSV ingestion: comma-separated numeric columns, one response column.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Which column holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseColumn {
    /// By header name; requires `has_header`.
    Name(String),
    /// 0-based column index.
    Index(usize),
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub has_header: bool,
    pub response: ResponseColumn,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: true,
            response: ResponseColumn::Index(0),
        }
    }
}

/// Read a dataset from any reader. See [`load_csv`] for the file wrapper.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let response_idx = match &opts.response {
        ResponseColumn::Index(i) => *i,
        ResponseColumn::Name(name) => {
            if !opts.has_header {
                return Err(Error::Data(
                    "response column by name requires a header row".into(),
                ));
            }
            let headers = rdr
                .headers()
                .map_err(|e| Error::Data(format!("cannot read CSV header: {e}")))?;
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Data(format!("response column '{name}' not found in header")))?
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y: Vec<f64> = Vec::new();
    let mut width: Option<usize> = None;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Data(format!("CSV parse error: {e}")))?;
        let line = record
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| "?".into());
        match width {
            None => {
                if record.len() < 2 {
                    return Err(Error::Data(format!(
                        "row {line}: need at least 2 columns (features + response)"
                    )));
                }
                if response_idx >= record.len() {
                    return Err(Error::Data(format!(
                        "response column index {response_idx} out of range for {} columns",
                        record.len()
                    )));
                }
                width = Some(record.len());
            }
            Some(w) => {
                if record.len() != w {
                    return Err(Error::Data(format!(
                        "row {line}: expected {w} columns, got {}",
                        record.len()
                    )));
                }
            }
        }
        let mut feats = Vec::with_capacity(record.len() - 1);
        for (c, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| {
                Error::Data(format!("row {line}: non-numeric cell '{cell}' in column {c}"))
            })?;
            if !value.is_finite() {
                return Err(Error::Data(format!(
                    "row {line}: non-finite value '{cell}' in column {c}"
                )));
            }
            if c == response_idx {
                y.push(value);
            } else {
                feats.push(value);
            }
        }
        rows.push(feats);
    }
    if rows.is_empty() {
        return Err(Error::Data("CSV contains no data rows".into()));
    }
    let n = rows.len();
    let p = rows[0].len();
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    Dataset::new(x, DVector::from_vec(y))
}

/// Load a dataset from a CSV file on disk.
pub fn load_csv<P: AsRef<Path>>(path: P, opts: &CsvOptions) -> Result<Dataset> {
    let file = File::open(path.as_ref()).map_err(|e| {
        Error::Data(format!("cannot open {}: {e}", path.as_ref().display()))
    })?;
    read_csv(file, opts)
}
