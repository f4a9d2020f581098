//! CSV / JSON plumbing: dataset ingestion, matrix export, complexity-table
//! export and experiment output files.

use crate::criterion::ComplexityTable;
use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::harness::RateScalingRow;
use nalgebra::{DMatrix, DVector};
use std::io::Write;
use std::path::Path;

/// Reads a numeric CSV into a matrix. A header row is detected by a
/// non-numeric first record and skipped.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => continue, // header row
            Err(e) => {
                return Err(Error::Domain(format!(
                    "non-numeric value in CSV row {}: {e}",
                    idx + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Domain(format!("no data rows in {}", path.display())));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Domain("ragged CSV: rows have differing widths".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Loads a dataset. When `y_path` is given, `x_path` holds X only and
/// `y_path` a single-column response; otherwise y is the last column of
/// `x_path`.
pub fn read_dataset(x_path: &Path, y_path: Option<&Path>, sigma2: f64) -> Result<Dataset> {
    match y_path {
        Some(yp) => {
            let x = read_matrix_csv(x_path)?;
            let ym = read_matrix_csv(yp)?;
            if ym.ncols() != 1 {
                return Err(Error::Domain(format!(
                    "response file must have one column, found {}",
                    ym.ncols()
                )));
            }
            Dataset::new(x, DVector::from_column_slice(ym.column(0).as_slice()), sigma2)
        }
        None => {
            let m = read_matrix_csv(x_path)?;
            if m.ncols() < 2 {
                return Err(Error::Domain(
                    "combined CSV needs at least one predictor column plus y".into(),
                ));
            }
            let p = m.ncols() - 1;
            let x = m.columns(0, p).into_owned();
            let y = DVector::from_column_slice(m.column(p).as_slice());
            Dataset::new(x, y, sigma2)
        }
    }
}

/// Writes a matrix as plain numeric CSV (no header), full precision.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_f64(m[(i, j)])).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the (family, k1, k2, C) complexity table for audit.
pub fn write_complexity_csv(path: &Path, table: &ComplexityTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["family", "k1", "k2", "C"])?;
    for (family, k1, k2, c) in table.rows() {
        w.write_record([
            format!("{family:?}").to_lowercase(),
            k1.to_string(),
            k2.to_string(),
            format_f64(c),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the rate-scaling table with the fixed column contract.
pub fn write_rate_scaling_csv(path: &Path, rows: &[RateScalingRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "p", "r1", "r2", "heredity", "risk", "se", "rate", "ratio", "seed"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.p.to_string(),
            r.r1.to_string(),
            r.r2.to_string(),
            r.heredity.to_string(),
            format_f64(r.risk),
            format_f64(r.se),
            format_f64(r.rate),
            format_f64(r.ratio),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Serializes any value as pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Round-trippable decimal rendering of an f64.
pub fn format_f64(v: f64) -> String {
    let mut buf = ryu_like(v);
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("NaN") {
        buf.push_str(".0");
    }
    buf
}

fn ryu_like(v: f64) -> String {
    // shortest representation that parses back exactly
    let s = format!("{v}");
    if s.parse::<f64>().map(|r| r == v || (r.is_nan() && v.is_nan())).unwrap_or(false) {
        s
    } else {
        format!("{v:.17}")
    }
}
