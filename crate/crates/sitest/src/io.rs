//! CSV ingestion and export of datasets.
//!
//! The file has a header row. The column named `y` is the response, every
//! other column is a covariate, taken in file order.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use sitest_core::Dataset;
use thiserror::Error;

/// Smallest sample the pipeline accepts from a file.
pub const MIN_ROWS: usize = 10;

pub const RESPONSE_COLUMN: &str = "y";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("no `{RESPONSE_COLUMN}` column in header {header:?}")]
    MissingResponse { header: Vec<String> },
    #[error("duplicate column `{0}` in header")]
    DuplicateColumn(String),
    #[error("no covariate columns besides `{RESPONSE_COLUMN}`")]
    NoCovariates,
    #[error("row {row} (line {line}) has {found} fields, header has {expected}")]
    Ragged {
        row: usize,
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("row {row} (line {line}), column `{column}`: `{value}` is not a finite number")]
    BadCell {
        row: usize,
        line: u64,
        column: String,
        value: String,
    },
    #[error("need at least {MIN_ROWS} data rows, found {0}")]
    TooFewRows(usize),
    #[error(transparent)]
    Core(#[from] sitest_core::Error),
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Open {
        path: path.display().to_string(),
        source,
    })?;
    read_dataset(file)
}

pub fn read_dataset(reader: impl Read) -> Result<Dataset, DataError> {
    let (data, n) = parse(reader)?;
    if n < MIN_ROWS {
        return Err(DataError::TooFewRows(n));
    }
    Ok(data)
}

/// Parses without the minimum-size gate.
fn parse(reader: impl Read) -> Result<(Dataset, usize), DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    for (k, name) in header.iter().enumerate() {
        if header[..k].contains(name) {
            return Err(DataError::DuplicateColumn(name.clone()));
        }
    }
    let y_col = header
        .iter()
        .position(|h| h == RESPONSE_COLUMN)
        .ok_or_else(|| DataError::MissingResponse {
            header: header.clone(),
        })?;
    let p = header.len() - 1;
    if p == 0 {
        return Err(DataError::NoCovariates);
    }

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        let line = record.position().map_or(0, |pos| pos.line());
        if record.len() != header.len() {
            return Err(DataError::Ragged {
                row,
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (k, cell) in record.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DataError::BadCell {
                    row,
                    line,
                    column: header[k].clone(),
                    value: cell.to_owned(),
                })?;
            if k == y_col {
                y.push(value);
            } else {
                x.push(value);
            }
        }
    }
    let n = y.len();
    Ok((Dataset::new(x, y, p)?, n))
}

/// Writes `x1,…,xp,y` with shortest round-trip formatting.
pub fn write_dataset(path: impl AsRef<Path>, data: &Dataset) -> Result<(), DataError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| DataError::Open {
        path: path.display().to_string(),
        source,
    })?;
    write_dataset_to(file, data)
}

pub fn write_dataset_to(writer: impl Write, data: &Dataset) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=data.p()).map(|l| format!("x{l}")).collect();
    header.push(RESPONSE_COLUMN.to_owned());
    wtr.write_record(&header)?;
    for (row, y) in data.rows().zip(data.y()) {
        wtr.write_record(row.iter().chain(std::iter::once(y)).map(f64::to_string))?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}
