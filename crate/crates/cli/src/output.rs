use std::io::Write;

use anyhow::Result;
use serde::Serialize;

use crate::args::Format;

/// CSV with a header row even when there are no records.
pub fn to_csv<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes)?)
}

/// Prints the rendering selected by `format` to stdout.
pub fn emit(
    format: Format,
    text: impl FnOnce() -> String,
    json: impl FnOnce() -> String,
    csv: impl FnOnce() -> Result<String>,
) -> Result<()> {
    let body = match format {
        Format::Text => text(),
        Format::Json => json(),
        Format::Csv => csv()?,
    };
    let mut out = std::io::stdout().lock();
    out.write_all(body.as_bytes())?;
    out.flush()?;
    Ok(())
}
