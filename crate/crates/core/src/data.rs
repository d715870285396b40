//! Delimited numeric text input.
//!
//! One record per line; fields separated by commas, tabs or spaces. Blank
//! lines and lines starting with `#` are skipped, and a first line that does
//! not parse as numbers is treated as a header.

use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

fn parse_line(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split([',', '\t', ' ', ';'])
        .filter(|f| !f.is_empty())
        .map(|f| f.trim().parse::<f64>().map_err(|_| f.to_string()))
        .collect()
}

/// Reads a rectangular table of numbers.
pub fn read_table<R: BufRead>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut seen_content = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::invalid("input", e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parsed = parse_line(trimmed);
        let first = !seen_content;
        seen_content = true;
        match parsed {
            Ok(row) => {
                if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                    return Err(Error::invalid(
                        "input",
                        format!("line {}: non-finite value {bad}", i + 1),
                    ));
                }
                if let Some(prev) = rows.first() {
                    if prev.len() != row.len() {
                        return Err(Error::invalid(
                            "input",
                            format!(
                                "line {}: expected {} fields, found {}",
                                i + 1,
                                prev.len(),
                                row.len()
                            ),
                        ));
                    }
                }
                rows.push(row);
            }
            Err(_) if first => continue,
            Err(field) => {
                return Err(Error::invalid(
                    "input",
                    format!("line {}: cannot parse '{field}'", i + 1),
                ));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::invalid("input", "no numeric records"));
    }
    Ok(rows)
}

pub fn read_table_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::invalid("path", format!("{}: {e}", path.display())))?;
    read_table(std::io::BufReader::new(file))
}

/// Splits a table whose last column is the response into `(rows, y)`.
pub fn split_response(table: Vec<Vec<f64>>) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if table[0].len() < 2 {
        return Err(Error::invalid(
            "input",
            "need at least one covariate column and a response column",
        ));
    }
    let mut y = Vec::with_capacity(table.len());
    let mut x = Vec::with_capacity(table.len());
    for mut row in table {
        y.push(row.pop().expect("nonempty row"));
        x.push(row);
    }
    Ok((x, y))
}
