//! CSV input and output.
//!
//! Rows are observations and columns are dimensions. A first row containing
//! any field that does not parse as a number is taken as a header.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use dcor_chisq::SampleMatrix;

use crate::error::{CliError, CliResult};

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        io_error(path, e)
    } else {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

fn parse_row(record: &csv::StringRecord) -> Option<Vec<f64>> {
    record.iter().map(|f| f.trim().parse::<f64>().ok()).collect()
}

/// Reads a numeric matrix, skipping an optional header row.
pub fn read_matrix(path: &Path) -> CliResult<SampleMatrix> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        match parse_row(&record) {
            Some(row) => rows.push(row),
            None if i == 0 => {}
            None => {
                return Err(CliError::Data(format!(
                    "{}: line {} is not numeric",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    SampleMatrix::from_rows(&rows).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Writes a table with a header row. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))
}

pub fn write_stdout(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| CliError::Io(format!("stdout: {e}")))
}
