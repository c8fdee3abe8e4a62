//! CSV tables with a header row and 17-significant-digit floats.

use std::fs;
use std::path::Path;

use crate::error::CliError;

/// Lossless decimal for binary64: `inf`, `-inf`, `nan` for non-finite values.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `a;b;c`, used for vector-valued cells.
pub fn list(vs: &[f64]) -> String {
    vs.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";")
}

pub fn flag(b: bool) -> String {
    if b { "true".into() } else { "false".into() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_csv()?).map_err(|e| CliError::io(path, e))
    }
}
