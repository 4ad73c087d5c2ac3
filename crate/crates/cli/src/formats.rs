//! On-disk formats.
//!
//! * matrices: UTF-8 CSV, one row per line, no header;
//! * edge lists: `i j weight` per line, 0-based, upper triangle including the diagonal;
//! * core scores and permutations: one value per line;
//! * configs and reports: JSON objects with snake_case keys.
//!
//! Reals are written in Rust's shortest round-trip form, so reading a written
//! file back yields the same bits.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn parse_real(tok: &str, path: &Path, line: usize) -> CliResult<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| CliError::Data(format!("{}:{line}: cannot parse {tok:?} as a number", path.display())))?;
    if !v.is_finite() {
        return Err(CliError::Data(format!("{}:{line}: non-finite value {tok:?}", path.display())));
    }
    Ok(v)
}

pub fn format_matrix(m: &DMatrix<f64>) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("numbers are ASCII"))
}

pub fn parse_matrix(text: &str, path: &Path) -> CliResult<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let row = rec.iter().map(|t| parse_real(t, path, k + 1)).collect::<CliResult<Vec<_>>>()?;
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    parse_matrix(&read(path)?, path)
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> CliResult<()> {
    write(path, &format_matrix(m)?)
}

/// Nonzero upper-triangle entries; the last diagonal entry is always written so
/// the node count survives isolated trailing nodes.
pub fn format_edges(theta: &DMatrix<f64>) -> String {
    let n = theta.nrows();
    let mut out = String::new();
    for i in 0..n {
        for j in i..n {
            let v = theta[(i, j)];
            if v != 0.0 || (i == n - 1 && j == n - 1) {
                out.push_str(&format!("{i} {j} {v}\n"));
            }
        }
    }
    out
}

pub fn parse_edges(text: &str, path: &Path, n: Option<usize>) -> CliResult<DMatrix<f64>> {
    let mut entries = Vec::new();
    let mut size = 0;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(CliError::Data(format!("{}:{}: expected `i j weight`", path.display(), k + 1)));
        }
        let idx = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| CliError::Data(format!("{}:{}: bad node index {t:?}", path.display(), k + 1)))
        };
        let (i, j) = (idx(toks[0])?, idx(toks[1])?);
        let w = parse_real(toks[2], path, k + 1)?;
        size = size.max(i + 1).max(j + 1);
        entries.push((i, j, w));
    }
    let n = match n {
        Some(n) if n < size => {
            return Err(CliError::Data(format!("{}: node index {} out of range for {n} nodes", path.display(), size - 1)))
        }
        Some(n) => n,
        None => size,
    };
    let mut theta = DMatrix::zeros(n, n);
    for (i, j, w) in entries {
        theta[(i, j)] = w;
        theta[(j, i)] = w;
    }
    Ok(theta)
}

pub fn read_edges(path: &Path, n: Option<usize>) -> CliResult<DMatrix<f64>> {
    parse_edges(&read(path)?, path, n)
}

pub fn write_edges(path: &Path, theta: &DMatrix<f64>) -> CliResult<()> {
    write(path, &format_edges(theta))
}

pub fn format_column<T: ToString>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string() + "\n").collect()
}

pub fn parse_scores(text: &str, path: &Path) -> CliResult<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| parse_real(l, path, k + 1))
        .collect()
}

pub fn read_scores(path: &Path) -> CliResult<Vec<f64>> {
    parse_scores(&read(path)?, path)
}

pub fn write_column<T: ToString>(path: &Path, values: &[T]) -> CliResult<()> {
    write(path, &format_column(values))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write(path, &to_json(value))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
