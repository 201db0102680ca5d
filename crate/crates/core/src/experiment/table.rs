//! Delimited output tables. Every table leads with a `config_hash` column.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub struct Table {
    hash: String,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(hash: &str, header: &[&str]) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(std::iter::once("config_hash").chain(header.iter().copied()))?;
        Ok(Self { hash: hash.to_string(), writer })
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        self.writer.write_record(std::iter::once(self.hash.clone()).chain(fields))?;
        Ok(())
    }

    pub fn into_string(self) -> Result<String> {
        let bytes = self.writer.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn save(self, path: &Path) -> Result<()> {
        write_file(path, &self.into_string()?)
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    File::create(path)?.write_all(text.as_bytes())?;
    Ok(())
}

/// Shortest representation that round-trips.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Sample mean and half-width of the normal-approximation 95% interval.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * var.sqrt() / n.sqrt())
}
