//! CSV input and output.
//!
//! Feature data has one column per feature plus an optional `label` column
//! holding 1-based true clusters. Allocation files carry either `c1..cK`
//! probability columns or a single 1-based `label` column. Matrices are
//! written without a header. Floats use Rust's shortest round-trip format,
//! so the output is a deterministic function of the values.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bma_cluster::indices::ScanRow;
use bma_cluster::{validate_allocation, AllocationMatrix, BmaResult, Error, FeatureMatrix};
use ndarray::Array2;

use crate::error::{CliError, Result};

/// Feature matrix plus the 0-based true labels if the file had a `label` column.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub truth: Option<Vec<usize>>,
    pub feature_names: Vec<String>,
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn headers(path: &Path, rdr: &mut csv::Reader<fs::File>) -> Result<Vec<String>> {
    let h = rdr
        .headers()
        .map_err(|e| CliError::input(path, None, e.to_string()))?;
    Ok(h.iter().map(str::to_string).collect())
}

fn parse_f64(path: &Path, row: usize, column: &str, cell: &str) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| {
        CliError::input(
            path,
            Some(row),
            format!("column `{column}`: `{cell}` is not a number"),
        )
    })?;
    if !v.is_finite() {
        return Err(CliError::input(
            path,
            Some(row),
            format!("column `{column}` is not finite"),
        ));
    }
    Ok(v)
}

fn parse_label(path: &Path, row: usize, cell: &str) -> Result<usize> {
    match cell.parse::<usize>() {
        Ok(l) if l >= 1 => Ok(l - 1),
        _ => Err(CliError::input(
            path,
            Some(row),
            format!("label `{cell}` is not a positive integer"),
        )),
    }
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut rdr = reader(path)?;
    let names = headers(path, &mut rdr)?;
    let label_col = names.iter().position(|h| h.eq_ignore_ascii_case("label"));
    let feature_names: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != label_col)
        .map(|(_, h)| h.clone())
        .collect();
    if feature_names.is_empty() {
        return Err(CliError::input(path, None, "no feature columns"));
    }
    let mut values = Vec::new();
    let mut truth = Vec::new();
    let mut n = 0;
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CliError::input(path, Some(row), e.to_string()))?;
        if record.len() != names.len() {
            return Err(CliError::input(
                path,
                Some(row),
                format!("expected {} fields, found {}", names.len(), record.len()),
            ));
        }
        for (j, cell) in record.iter().enumerate() {
            if Some(j) == label_col {
                truth.push(parse_label(path, row, cell)?);
            } else {
                values.push(parse_f64(path, row, &names[j], cell)?);
            }
        }
        n += 1;
    }
    if n < 2 {
        return Err(CliError::input(
            path,
            None,
            format!("need at least 2 rows, found {n}"),
        ));
    }
    let matrix = Array2::from_shape_vec((n, feature_names.len()), values)
        .expect("row lengths checked above");
    let features = FeatureMatrix::new(matrix).map_err(|e| core_input(path, e))?;
    Ok(Dataset {
        features,
        truth: label_col.map(|_| truth),
        feature_names,
    })
}

/// Reads a soft (`c1..cK`) or hard (`label`) allocation file.
pub fn read_allocation(path: &Path, model_id: &str) -> Result<AllocationMatrix> {
    let mut rdr = reader(path)?;
    let names = headers(path, &mut rdr)?;
    let hard = names.len() == 1 && names[0].eq_ignore_ascii_case("label");
    if !hard {
        for (j, h) in names.iter().enumerate() {
            if !h.eq_ignore_ascii_case(&format!("c{}", j + 1)) {
                return Err(CliError::input(
                    path,
                    None,
                    format!(
                        "header must be `label` or `c1,...,cK`; column {} is `{h}`",
                        j + 1
                    ),
                ));
            }
        }
    }
    let mut values = Vec::new();
    let mut n = 0;
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CliError::input(path, Some(row), e.to_string()))?;
        if record.len() != names.len() {
            return Err(CliError::input(
                path,
                Some(row),
                format!("expected {} fields, found {}", names.len(), record.len()),
            ));
        }
        for (j, cell) in record.iter().enumerate() {
            if hard {
                values.push(parse_label(path, row, cell)? as f64);
            } else {
                values.push(parse_f64(path, row, &names[j], cell)?);
            }
        }
        n += 1;
    }
    if hard {
        let labels: Vec<usize> = values.iter().map(|&v| v as usize).collect();
        return AllocationMatrix::from_labels(&labels, model_id).map_err(|e| core_input(path, e));
    }
    let raw = Array2::from_shape_vec((n, names.len()), values).expect("row lengths checked above");
    validate_allocation(raw, model_id).map_err(|e| core_input(path, e))
}

/// Reads a headerless square matrix of values.
pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut values = Vec::new();
    let mut width = None;
    let mut n = 0;
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CliError::input(path, Some(row), e.to_string()))?;
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(CliError::input(path, Some(row), "ragged row"));
        }
        for (j, cell) in record.iter().enumerate() {
            values.push(parse_f64(path, row, &format!("{}", j + 1), cell)?);
        }
        n += 1;
    }
    if width != Some(n) {
        return Err(CliError::input(
            path,
            None,
            format!("matrix is not square ({n} rows)"),
        ));
    }
    Ok(Array2::from_shape_vec((n, n), values).expect("square shape checked above"))
}

/// Maps a validation error from the core library onto the file it came from,
/// converting 0-based row indices to 1-based data rows.
fn core_input(path: &Path, e: Error) -> CliError {
    let row = match e {
        Error::NonFiniteEntry { row, .. }
        | Error::NegativeProbability { row, .. }
        | Error::RowSumViolation { row, .. } => Some(row + 1),
        _ => None,
    };
    CliError::input(path, row, e.to_string())
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn push_row<'a>(out: &mut String, cells: impl IntoIterator<Item = &'a f64>) {
    let mut first = true;
    for v in cells {
        if !first {
            out.push(',');
        }
        first = false;
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

pub fn matrix_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.outer_iter() {
        push_row(&mut out, row.iter());
    }
    out
}

/// `c1..cK,label,uncertainty` with 1-based modal labels.
pub fn allocations_csv(r: &BmaResult) -> String {
    let mut out = String::new();
    for k in 1..=r.k_bma {
        write!(out, "c{k},").unwrap();
    }
    out.push_str("label,uncertainty\n");
    for ((row, label), u) in r
        .allocation
        .outer_iter()
        .zip(r.modal_labels())
        .zip(&r.uncertainty)
    {
        for v in row {
            write!(out, "{v},").unwrap();
        }
        writeln!(out, "{},{u}", label + 1).unwrap();
    }
    out
}

/// `x1..xd,label` with 1-based labels.
pub fn dataset_csv(x: &FeatureMatrix, labels: &[usize]) -> String {
    let mut out = String::new();
    for j in 1..=x.d() {
        write!(out, "x{j},").unwrap();
    }
    out.push_str("label\n");
    for (row, l) in x.values().outer_iter().zip(labels) {
        for v in row {
            write!(out, "{v},").unwrap();
        }
        writeln!(out, "{}", l + 1).unwrap();
    }
    out
}

/// One row per k; failed fits leave the index columns empty and fill `error`.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("k,ch,xb,dunn,silhouette,davies_bouldin,error\n");
    for row in rows {
        match &row.outcome {
            Ok(r) => writeln!(
                out,
                "{},{},{},{},{},{},",
                row.k, r.ch, r.xb, r.dunn, r.silhouette, r.davies_bouldin
            )
            .unwrap(),
            Err(e) => writeln!(
                out,
                "{},,,,,,\"{}\"",
                row.k,
                e.to_string().replace('"', "'")
            )
            .unwrap(),
        }
    }
    out
}
