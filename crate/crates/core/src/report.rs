//! Table and manifest output.
//!
//! All floating-point values are written at 17 significant digits so
//! that reading a table back reproduces the original bits exactly;
//! optional values render as empty fields.

use std::path::Path;

use crate::error::{Error, Result};

/// Formats a float at full round-trip precision (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats an optional float; absent values become empty fields.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Parses a possibly-empty table field back into an optional float.
pub fn parse_opt_f64(field: &str) -> Result<Option<f64>> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Schema(format!("cannot parse '{field}' as a number")))
}

/// Parses a required float field.
pub fn parse_f64(field: &str) -> Result<f64> {
    parse_opt_f64(field)?
        .ok_or_else(|| Error::Schema("expected a number, found an empty field".into()))
}

/// Writes a CSV file with the given header and rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::io(path, &e))?;
    writer.write_record(header).map_err(|e| Error::io(path, &e))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writer.write_record(row).map_err(|e| Error::io(path, &e))?;
    }
    writer.flush().map_err(|e| Error::io(path, &e))?;
    Ok(())
}

/// Reads a CSV file into its header and string rows.
///
/// Structural problems (ragged rows, non-UTF-8) surface as schema errors.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::io(path, &e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// Writes a plain text file.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, &e))
}
