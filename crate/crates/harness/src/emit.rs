//! CSV and JSON output for sweep reports.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use grasscount_core::exact::format_rational;

use crate::error::Result;
use crate::sweep::{Format, SweepReport};

pub const CSV_HEADER: [&str; 6] = ["h2", "count", "predicted", "ratio", "leading_error", "ms"];

fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(report: &SweepReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &report.rows {
        w.write_record([
            format_rational(&row.h2),
            cell(row.count),
            cell(row.predicted),
            cell(row.ratio),
            cell(row.leading_error),
            cell(row.ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(report: &SweepReport, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn render(report: &SweepReport, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(report, &mut buf)?,
        Format::Json => write_json(report, &mut buf)?,
    }
    Ok(buf)
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit(report: &SweepReport, format: Format, path: Option<&Path>) -> Result<()> {
    let bytes = render(report, format)?;
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            f.write_all(&bytes)?;
            f.flush()?;
        }
        None => io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
