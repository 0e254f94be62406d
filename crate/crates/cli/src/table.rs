//! Tabular CSV ingestion and emission. Input files need a header row, are
//! comma-separated, strictly rectangular, and fully numeric below the header;
//! a missing cell is a load error that names the line. Output floats use full
//! round-trip precision (17 significant digits) so downstream diffs are exact.

use std::path::Path;

use ridgeboost_core::DenseMatrix;

use crate::CliError;

/// A parsed numeric table: header names plus a rectangular body.
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: cannot read header row: {e}", path.display())))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers.is_empty() || headers.iter().any(|h| h.is_empty()) {
        return Err(CliError::Data(format!(
            "{}: header row must name every column",
            path.display()
        )));
    }
    for (i, h) in headers.iter().enumerate() {
        if headers[..i].contains(h) {
            return Err(CliError::Data(format!(
                "{}: duplicate column name \"{h}\"",
                path.display()
            )));
        }
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record
            .map_err(|e| CliError::Data(format!("{}: malformed CSV: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(CliError::Data(format!(
                "{} line {line}: expected {} fields, got {}",
                path.display(),
                headers.len(),
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(headers.len());
        for (field, name) in record.iter().zip(&headers) {
            if field.is_empty() {
                return Err(CliError::Data(format!(
                    "{} line {line}: missing value in column \"{name}\"",
                    path.display()
                )));
            }
            let value = field.parse::<f64>().map_err(|_| {
                CliError::Data(format!(
                    "{} line {line}: column \"{name}\": not a number: \"{field}\"",
                    path.display()
                ))
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no data rows below the header",
            path.display()
        )));
    }
    Ok(Table { headers, rows })
}

/// A design extracted from a table: covariates in original column order and,
/// when an outcome column is designated, the outcome vector.
pub struct Design {
    pub covariate_names: Vec<String>,
    pub x: DenseMatrix,
    pub y: Option<Vec<f64>>,
}

pub fn design_from_table(
    table: &Table,
    outcome: Option<&str>,
    origin: &Path,
) -> Result<Design, CliError> {
    let outcome_idx = match outcome {
        None => None,
        Some(name) => Some(
            table
                .headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| {
                    CliError::Data(format!(
                        "{}: outcome column \"{name}\" not found (columns: {})",
                        origin.display(),
                        table.headers.join(", ")
                    ))
                })?,
        ),
    };
    let covariate_names: Vec<String> = table
        .headers
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != outcome_idx)
        .map(|(_, h)| h.clone())
        .collect();
    if covariate_names.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no covariate columns besides the outcome",
            origin.display()
        )));
    }
    let n = table.rows.len();
    let d = covariate_names.len();
    let mut x = DenseMatrix::zeros(n, d);
    let mut y = outcome_idx.map(|_| Vec::with_capacity(n));
    for (i, row) in table.rows.iter().enumerate() {
        let mut k = 0;
        for (j, v) in row.iter().enumerate() {
            if Some(j) == outcome_idx {
                if let Some(y) = y.as_mut() {
                    y.push(*v);
                }
            } else {
                x.set(i, k, *v);
                k += 1;
            }
        }
    }
    Ok(Design {
        covariate_names,
        x,
        y,
    })
}

/// Full round-trip float formatting: 17 significant digits in scientific
/// notation, so parsing the field recovers the exact f64.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Quotes a CSV field if it contains a delimiter, quote, or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes a CSV file with LF line endings and an optional `#` footer comment.
pub fn write_csv(
    path: &Path,
    header: &str,
    rows: impl IntoIterator<Item = String>,
    footer: Option<String>,
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    if let Some(footer) = footer {
        out.push_str(&footer);
        out.push('\n');
    }
    std::fs::write(path, out)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}
