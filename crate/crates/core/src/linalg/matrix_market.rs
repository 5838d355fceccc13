//! Matrix Market text IO for real general matrices.
//!
//! Coordinate files load as CSR maps, array files as dense maps. Writing
//! emits the coordinate format for sparse maps (entries sorted by row, then
//! column) and the column-major array format for dense maps, with 17
//! significant digits so values round-trip exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::linear_map::{LinearMap, Storage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<LinearMap> {
    let file = File::open(path)?;
    parse_matrix_market(BufReader::new(file))
}

pub fn parse_matrix_market(reader: impl BufRead) -> Result<LinearMap> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (line_no, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(parse_err(1, "empty file")),
    };
    let layout = parse_header(line_no, &header)?;

    // Size line, skipping comments and blank lines.
    let mut size: Option<(usize, Vec<usize>)> = None;
    for (n, line) in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields = t
            .split_whitespace()
            .map(|f| {
                f.parse::<usize>()
                    .map_err(|_| parse_err(n, format!("bad size field `{f}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        size = Some((n, fields));
        break;
    }
    let (size_line, size) = size.ok_or_else(|| parse_err(line_no, "missing size line"))?;

    match layout {
        Layout::Coordinate => {
            let [rows, cols, nnz] = size[..] else {
                return Err(parse_err(
                    size_line,
                    "coordinate size line must be `rows cols nnz`",
                ));
            };
            check_dims(size_line, rows, cols)?;
            let mut triplets = Vec::with_capacity(nnz);
            let mut last_line = size_line;
            for (n, line) in lines {
                let line = line?;
                last_line = n;
                let t = line.trim();
                if t.is_empty() || t.starts_with('%') {
                    continue;
                }
                if triplets.len() == nnz {
                    return Err(parse_err(n, format!("more than {nnz} entries")));
                }
                let mut fields = t.split_whitespace();
                let (Some(r), Some(c), Some(v), None) =
                    (fields.next(), fields.next(), fields.next(), fields.next())
                else {
                    return Err(parse_err(n, "entry must be `row col value`"));
                };
                let r = parse_index(n, r, rows)?;
                let c = parse_index(n, c, cols)?;
                let v = parse_value(n, v)?;
                triplets.push((r, c, v));
            }
            if triplets.len() != nnz {
                return Err(parse_err(
                    last_line,
                    format!("expected {nnz} entries, found {}", triplets.len()),
                ));
            }
            LinearMap::from_triplets(rows, cols, &triplets)
        }
        Layout::Array => {
            let [rows, cols] = size[..] else {
                return Err(parse_err(size_line, "array size line must be `rows cols`"));
            };
            check_dims(size_line, rows, cols)?;
            let total = rows * cols;
            let mut col_major = Vec::with_capacity(total);
            let mut last_line = size_line;
            for (n, line) in lines {
                let line = line?;
                last_line = n;
                let t = line.trim();
                if t.is_empty() || t.starts_with('%') {
                    continue;
                }
                for f in t.split_whitespace() {
                    if col_major.len() == total {
                        return Err(parse_err(n, format!("more than {total} values")));
                    }
                    col_major.push(parse_value(n, f)?);
                }
            }
            if col_major.len() != total {
                return Err(parse_err(
                    last_line,
                    format!("expected {total} values, found {}", col_major.len()),
                ));
            }
            let mut row_major = vec![0.0; total];
            for (i, v) in col_major.into_iter().enumerate() {
                let (r, c) = (i % rows, i / rows);
                row_major[r * cols + c] = v;
            }
            LinearMap::dense(rows, cols, row_major)
        }
    }
}

fn parse_header(line_no: usize, header: &str) -> Result<Layout> {
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(
            line_no,
            "expected `%%MatrixMarket matrix <layout> real general`",
        ));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(line_no, format!("unknown layout `{other}`"))),
    };
    if tokens[3] != "real" {
        return Err(parse_err(
            line_no,
            format!("unsupported field `{}` (only real)", tokens[3]),
        ));
    }
    if tokens[4] != "general" {
        return Err(parse_err(
            line_no,
            format!("unsupported symmetry `{}` (only general)", tokens[4]),
        ));
    }
    Ok(layout)
}

fn check_dims(line: usize, rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(parse_err(line, "matrix dimensions must be >= 1"));
    }
    Ok(())
}

fn parse_index(line: usize, field: &str, bound: usize) -> Result<usize> {
    let idx: usize = field
        .parse()
        .map_err(|_| parse_err(line, format!("bad index `{field}`")))?;
    if idx == 0 || idx > bound {
        return Err(parse_err(
            line,
            format!("index {idx} out of range 1..={bound}"),
        ));
    }
    Ok(idx - 1)
}

fn parse_value(line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(line, format!("bad value `{field}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value `{field}`")));
    }
    Ok(v)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn write_matrix_market(map: &LinearMap, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    format_matrix_market(map, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn format_matrix_market(map: &LinearMap, out: &mut impl Write) -> Result<()> {
    let (rows, cols) = (map.rows(), map.cols());
    match map.storage() {
        Storage::Csr { .. } => {
            writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(out, "{rows} {cols} {}", map.nnz())?;
            for (r, c, v) in map.triplets() {
                writeln!(out, "{} {} {v:.16e}", r + 1, c + 1)?;
            }
        }
        Storage::Dense(data) => {
            writeln!(out, "%%MatrixMarket matrix array real general")?;
            writeln!(out, "{rows} {cols}")?;
            for c in 0..cols {
                for r in 0..rows {
                    writeln!(out, "{:.16e}", data[r * cols + c])?;
                }
            }
        }
    }
    Ok(())
}
