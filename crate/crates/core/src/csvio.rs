//! Dense numeric CSV matrices and newline-delimited vectors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Reads a dense numeric matrix. A single header row is skipped when its
/// first token does not parse as a number. Row and column numbers in errors
/// are 1-based file positions.
pub fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(file)
}

pub(crate) fn parse_matrix(reader: impl std::io::Read) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line()) as usize;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if idx == 0 && record.get(0).is_some_and(|tok| tok.parse::<f64>().is_err()) {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, tok) in record.iter().enumerate() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                row: line,
                col: col + 1,
                msg: format!("not a number: {tok:?}"),
            })?;
            row.push(v);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    row: line,
                    col: row.len().min(w) + 1,
                    msg: format!("ragged row: expected {w} fields, found {}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes rows as comma-separated values using shortest round-trip
/// decimal formatting.
pub fn write_matrix<'a, I>(path: &Path, header: Option<&[String]>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    if let Some(h) = header {
        writeln!(w, "{}", h.join(",")).map_err(io)?;
    }
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                w.write_all(b",").map_err(io)?;
            }
            first = false;
            write!(w, "{v}").map_err(io)?;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads one number per line, ignoring blank lines and `#` comments.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let tok = line.trim();
        if tok.is_empty() || tok.starts_with('#') {
            continue;
        }
        let v: f64 = tok.parse().map_err(|_| Error::Parse {
            row: i + 1,
            col: 1,
            msg: format!("not a number: {tok:?}"),
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_vector(path: &Path, values: &[f64]) -> Result<()> {
    let mut s = String::with_capacity(values.len() * 20);
    for v in values {
        s.push_str(&format!("{v}\n"));
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}
