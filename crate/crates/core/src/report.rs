//! Shared helpers for CSV and JSON artifacts.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Round-trip decimal formatting (17 significant digits) for CSV cells.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_json<T: Serialize, W: Write>(value: &T, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, value).map_err(|e| Error::Io(e.into()))
}

/// Writes `header` then `rows` as CSV.
pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
