//! Matrix files: dense CSV with labels, and 1-based coordinate triplets with
//! label side files (`<path>.rows`, `<path>.cols`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{default_labels, LabeledMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    #[default]
    Csv,
    Coo,
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "coo" => Ok(Self::Coo),
            _ => Err(Error::invalid(format!("unknown matrix format `{s}`"))),
        }
    }
}

fn side_file(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn count<T: Scalar>(s: &str, line: usize) -> Result<T> {
    let s = s.trim();
    let n: u64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("`{s}` is not a nonnegative integer")))?;
    T::from_u64(n).ok_or_else(|| Error::parse(line, format!("{n} does not fit the scalar type")))
}

fn check_integral<T: Scalar>(m: &LabeledMatrix<T>) -> Result<()> {
    if m.is_integral() {
        Ok(())
    } else {
        Err(Error::invalid("only integer tables can be written"))
    }
}

pub fn read_matrix<T: Scalar>(path: &Path, format: MatrixFormat) -> Result<LabeledMatrix<T>> {
    match format {
        MatrixFormat::Csv => parse_csv(&std::fs::read_to_string(path)?),
        MatrixFormat::Coo => {
            let rows = read_labels(&side_file(path, "rows"))?;
            let cols = read_labels(&side_file(path, "cols"))?;
            parse_coo(&std::fs::read_to_string(path)?, rows, cols)
        }
    }
}

pub fn write_matrix<T: Scalar>(
    m: &LabeledMatrix<T>,
    path: &Path,
    format: MatrixFormat,
) -> Result<()> {
    match format {
        MatrixFormat::Csv => std::fs::write(path, to_csv(m)?)?,
        MatrixFormat::Coo => {
            std::fs::write(path, to_coo(m)?)?;
            std::fs::write(side_file(path, "rows"), join_lines(m.row_labels()))?;
            std::fs::write(side_file(path, "cols"), join_lines(m.col_labels()))?;
        }
    }
    Ok(())
}

fn join_lines(labels: &[String]) -> String {
    labels.iter().map(|l| format!("{l}\n")).collect()
}

fn read_labels(path: &Path) -> Result<Option<Vec<String>>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)?;
    Ok(Some(text.lines().map(|l| l.trim().to_string()).collect()))
}

/// First row holds column labels after a corner cell; first column holds
/// row labels.
pub fn parse_csv<T: Scalar>(text: &str) -> Result<LabeledMatrix<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::parse(1, "empty file")),
    };
    let col_labels: Vec<String> = header
        .iter()
        .skip(1)
        .map(|s| s.trim().to_string())
        .collect();
    let mut row_labels = Vec::new();
    let mut triplets = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != col_labels.len() + 1 {
            return Err(Error::parse(
                line,
                format!("{} fields, expected {}", rec.len(), col_labels.len() + 1),
            ));
        }
        let i = row_labels.len();
        row_labels.push(rec[0].trim().to_string());
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let x: T = count(cell, line)?;
            if x > T::zero() {
                triplets.push((i, j, x));
            }
        }
    }
    LabeledMatrix::from_counts(row_labels, col_labels, triplets)
}

pub fn to_csv<T: Scalar>(m: &LabeledMatrix<T>) -> Result<String> {
    check_integral(m)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(std::iter::once("").chain(m.col_labels().iter().map(String::as_str)))
        .map_err(io)?;
    let dense = m.to_dense();
    for (i, label) in m.row_labels().iter().enumerate() {
        let cells = dense.row(i).iter().map(|x| format!("{x}"));
        w.write_record(std::iter::once(label.clone()).chain(cells))
            .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}

/// Header `I J NNZ`, then `i j value` with 1-based indices. Labels default
/// to `R1..`/`C1..` when not supplied.
pub fn parse_coo<T: Scalar>(
    text: &str,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
) -> Result<LabeledMatrix<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%') && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing `I J NNZ` header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 {
        return Err(Error::parse(hline, "header must be `I J NNZ`"));
    }
    let dim = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::parse(hline, format!("`{s}` is not a size")))
    };
    let (ni, nj, nnz) = (dim(h[0])?, dim(h[1])?, dim(h[2])?);

    let mut triplets = Vec::with_capacity(nnz);
    let mut seen = std::collections::HashSet::with_capacity(nnz);
    let mut last = hline;
    for (n, l) in lines {
        last = n;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::parse(n, "expected `row col value`"));
        }
        let index = |s: &str, bound: usize, what: &str| -> Result<usize> {
            let k: usize = s
                .parse()
                .map_err(|_| Error::parse(n, format!("`{s}` is not a {what} index")))?;
            if k == 0 || k > bound {
                return Err(Error::parse(
                    n,
                    format!("{what} index {k} outside 1..={bound}"),
                ));
            }
            Ok(k - 1)
        };
        let (i, j) = (index(f[0], ni, "row")?, index(f[1], nj, "column")?);
        if !seen.insert((i, j)) {
            return Err(Error::parse(
                n,
                format!("duplicate cell ({}, {})", i + 1, j + 1),
            ));
        }
        triplets.push((i, j, count::<T>(f[2], n)?));
    }
    if triplets.len() != nnz {
        return Err(Error::parse(
            last,
            format!("header declares {nnz} entries, found {}", triplets.len()),
        ));
    }
    let labels =
        |given: Option<Vec<String>>, n: usize, prefix: &str, what: &str| -> Result<Vec<String>> {
            match given {
                Some(l) if l.len() != n => Err(Error::parse(
                    l.len().min(n) + 1,
                    format!("{} {what} labels for {n} {what}s", l.len()),
                )),
                Some(l) => Ok(l),
                None => Ok(default_labels(prefix, n)),
            }
        };
    LabeledMatrix::from_counts(
        labels(row_labels, ni, "R", "row")?,
        labels(col_labels, nj, "C", "column")?,
        triplets,
    )
}

pub fn to_coo<T: Scalar>(m: &LabeledMatrix<T>) -> Result<String> {
    check_integral(m)?;
    let mut s = format!("{} {} {}\n", m.nrows(), m.ncols(), m.nnz());
    for &(i, j, x) in m.triplets() {
        let _ = writeln!(s, "{} {} {x}", i + 1, j + 1);
    }
    Ok(s)
}
