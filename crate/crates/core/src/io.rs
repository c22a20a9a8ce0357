//! Matrix files (csv, coordinate triplets, `CSELMAT1` binary) and the JSON
//! run summary.
//!
//! Indices are 0-based everywhere: coordinate triplets, index lists and the
//! summary's `selected` array.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::distributed::PhaseTimings;
use crate::error::{CssError, Result};
use crate::greedy::StopReason;
use crate::matrix::Matrix;

/// First eight bytes of a binary matrix file.
pub const BINARY_MAGIC: &[u8; 8] = b"CSELMAT1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// One row per line, comma-separated decimals.
    Csv,
    /// Header `m n nnz`, then `row col value` triplets; missing entries are zero.
    Coordinate,
    /// `CSELMAT1`, `m` and `n` as u64 LE, then column-major f64 LE payload.
    Binary,
}

impl Format {
    /// Guess from the file extension: `.csv`, `.coo`/`.mtx`/`.txt`, `.bin`.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "coo" | "mtx" | "txt" => Some(Format::Coordinate),
            "bin" => Some(Format::Binary),
            _ => None,
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Format::Csv => "csv",
            Format::Coordinate => "coordinate",
            Format::Binary => "binary",
        })
    }
}

impl FromStr for Format {
    type Err = CssError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "coordinate" | "coo" => Ok(Format::Coordinate),
            "binary" | "bin" => Ok(Format::Binary),
            other => Err(CssError::InvalidArgument(format!("unknown matrix format '{other}'"))),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> CssError {
    CssError::Parse { line, msg: msg.into() }
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("'{}' is not a number", token.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value '{}'", token.trim())));
    }
    Ok(v)
}

pub fn read_csv(reader: impl BufRead) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| parse_value(t, lineno))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    lineno,
                    format!("expected {} values, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    Matrix::from_rows(&rows)
}

pub fn read_coordinate(reader: impl BufRead) -> Result<Matrix> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty() && !s.starts_with('%')));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing 'm n nnz' header"))?;
    let header = header?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(hline, format!("bad header field '{t}'"))))
        .collect::<Result<_>>()?;
    let [m, n, nnz] = dims[..] else {
        return Err(parse_err(hline, "header must be 'm n nnz'"));
    };
    let mut data = vec![0.0; m * n];
    let mut seen = 0usize;
    for (lineno, line) in lines {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [r, c, v] = fields[..] else {
            return Err(parse_err(lineno, "expected 'row col value'"));
        };
        let row: usize = r.parse().map_err(|_| parse_err(lineno, format!("bad row index '{r}'")))?;
        let col: usize = c.parse().map_err(|_| parse_err(lineno, format!("bad column index '{c}'")))?;
        let value = parse_value(v, lineno)?;
        if row >= m || col >= n {
            return Err(CssError::Bounds { line: lineno, row, col, rows: m, cols: n });
        }
        // Repeated coordinates accumulate.
        data[col * m + row] += value;
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(hline, format!("header declares {nnz} entries, found {seen}")));
    }
    Matrix::from_column_major(m, n, data)
}

pub fn read_binary(mut reader: impl Read) -> Result<Matrix> {
    let mut header = [0u8; 24];
    reader
        .read_exact(&mut header)
        .map_err(|_| parse_err(0, "truncated header"))?;
    if &header[..8] != BINARY_MAGIC {
        return Err(parse_err(0, "bad magic, expected CSELMAT1"));
    }
    let m = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let n = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
    let mut payload = Vec::new();
    reader.read_to_end(&mut payload)?;
    let expected = m.checked_mul(n).and_then(|x| x.checked_mul(8));
    if expected != Some(payload.len()) {
        return Err(parse_err(
            0,
            format!("payload is {} bytes, expected 8·{m}·{n}", payload.len()),
        ));
    }
    let data = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Matrix::from_column_major(m, n, data)
}

pub fn read_matrix(reader: impl Read, format: Format) -> Result<Matrix> {
    match format {
        Format::Csv => read_csv(BufReader::new(reader)),
        Format::Coordinate => read_coordinate(BufReader::new(reader)),
        Format::Binary => read_binary(BufReader::new(reader)),
    }
}

pub fn load_matrix(path: impl AsRef<Path>, format: Format) -> Result<Matrix> {
    read_matrix(fs::File::open(path)?, format)
}

/// CSV values use the shortest decimal that parses back to the same f64.
pub fn write_csv(m: &Matrix, mut w: impl Write) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| m.get(i, j).to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Only non-zero entries are written.
pub fn write_coordinate(m: &Matrix, mut w: impl Write) -> Result<()> {
    let nnz = m.as_slice().iter().filter(|&&x| x != 0.0).count();
    writeln!(w, "{} {} {nnz}", m.nrows(), m.ncols())?;
    for j in 0..m.ncols() {
        for (i, &v) in m.column(j).iter().enumerate() {
            if v != 0.0 {
                writeln!(w, "{i} {j} {v}")?;
            }
        }
    }
    Ok(())
}

pub fn write_binary(m: &Matrix, mut w: impl Write) -> Result<()> {
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_matrix(m: &Matrix, w: impl Write, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_csv(m, w),
        Format::Coordinate => write_coordinate(m, w),
        Format::Binary => write_binary(m, w),
    }
}

pub fn save_matrix(m: &Matrix, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    write_matrix(m, &mut w, format)?;
    w.flush()?;
    Ok(())
}

/// Whitespace- or newline-separated 0-based indices.
pub fn parse_indices(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .flat_map(|(k, line)| line.split([' ', '\t', ',']).map(move |t| (k + 1, t)))
        .filter(|(_, t)| !t.trim().is_empty())
        .map(|(line, t)| {
            t.trim()
                .parse()
                .map_err(|_| parse_err(line, format!("'{}' is not an index", t.trim())))
        })
        .collect()
}

pub fn format_indices(indices: &[usize]) -> String {
    indices.iter().map(|i| format!("{i}\n")).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunParameters {
    pub l: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sketch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

/// The JSON document written by `--summary`.
///
/// `timings` is the only field that varies between identical runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub method: String,
    pub parameters: RunParameters,
    /// Global 0-based indices in selection order.
    pub selected: Vec<usize>,
    /// `‖A − P A‖²_F` over the selection.
    pub f_value: f64,
    /// `‖B − P B‖²_F` against the sketch, when one was used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_sketch_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<PhaseTimings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub columns_moved: Option<usize>,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is always serializable")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}
