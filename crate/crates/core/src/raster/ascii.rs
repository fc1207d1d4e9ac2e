//! ESRI-style ASCII grid reading and writing.

use super::{GridGeometry, RasterError, RasterGrid, DEFAULT_NODATA};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const HEADER_KEYS: [&str; 5] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize"];
const NODATA_KEY: &str = "nodata_value";

pub fn read_asc(path: impl AsRef<Path>) -> Result<RasterGrid, RasterError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| RasterError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_asc(&text)
}

pub fn write_asc(path: impl AsRef<Path>, grid: &RasterGrid) -> Result<(), RasterError> {
    let path = path.as_ref();
    fs::write(path, to_asc_string(grid)).map_err(|source| RasterError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn header_value<'a>(
    line_no: usize,
    line: Option<&'a str>,
    key: &str,
) -> Result<&'a str, RasterError> {
    let line = line.ok_or_else(|| RasterError::MalformedHeader {
        line: line_no,
        message: format!("missing {key}"),
    })?;
    let mut tokens = line.split_whitespace();
    let found = tokens.next().unwrap_or("");
    if !found.eq_ignore_ascii_case(key) {
        return Err(RasterError::MalformedHeader {
            line: line_no,
            message: format!("expected {key}, found {found:?}"),
        });
    }
    match (tokens.next(), tokens.next()) {
        (Some(v), None) => Ok(v),
        _ => Err(RasterError::MalformedHeader {
            line: line_no,
            message: format!("{key} needs exactly one value"),
        }),
    }
}

fn header_number<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, RasterError> {
    v.parse().map_err(|_| RasterError::MalformedHeader {
        line,
        message: format!("{key} value {v:?} is not a valid number"),
    })
}

pub fn parse_asc(text: &str) -> Result<RasterGrid, RasterError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();

    let mut header = [0.0f64; 5];
    let (mut n_cols, mut n_rows) = (0usize, 0usize);
    for (k, key) in HEADER_KEYS.iter().enumerate() {
        let (no, line) = match lines.next() {
            Some((no, l)) => (no, Some(l)),
            None => (k + 1, None),
        };
        let v = header_value(no, line, key)?;
        match k {
            0 => n_cols = header_number(no, key, v)?,
            1 => n_rows = header_number(no, key, v)?,
            _ => header[k] = header_number(no, key, v)?,
        }
    }

    let mut nodata = DEFAULT_NODATA;
    if let Some(&(no, line)) = lines.peek() {
        let first = line.split_whitespace().next().unwrap_or("");
        if first.eq_ignore_ascii_case(NODATA_KEY) {
            let v = header_value(no, Some(line), NODATA_KEY)?;
            nodata = header_number(no, NODATA_KEY, v)?;
            lines.next();
        }
    }

    let geometry = GridGeometry::new(header[2], header[3], header[4], n_cols, n_rows).map_err(
        |e| RasterError::MalformedHeader {
            line: 1,
            message: e.to_string(),
        },
    )?;

    let mut values = Vec::with_capacity(geometry.len());
    let mut row = 0usize;
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if row == n_rows {
            row += 1;
            continue;
        }
        let start = values.len();
        for token in line.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| RasterError::BadNumber {
                line: no,
                token: token.to_string(),
            })?;
            values.push(v);
        }
        let found = values.len() - start;
        if found != n_cols {
            return Err(RasterError::RowLength {
                row,
                expected: n_cols,
                found,
            });
        }
        row += 1;
    }
    if row != n_rows {
        return Err(RasterError::RowCount {
            expected: n_rows,
            found: row,
        });
    }
    RasterGrid::new(geometry, values, nodata)
}

/// Renders the grid; valid values carry six decimals, nodata cells print the sentinel.
pub fn to_asc_string(grid: &RasterGrid) -> String {
    let g = grid.geometry();
    let mut out = String::with_capacity(g.len() * 12 + 128);
    let _ = writeln!(out, "ncols {}", g.n_cols);
    let _ = writeln!(out, "nrows {}", g.n_rows);
    let _ = writeln!(out, "xllcorner {}", g.origin_x);
    let _ = writeln!(out, "yllcorner {}", g.origin_y);
    let _ = writeln!(out, "cellsize {}", g.cell_size);
    let _ = writeln!(out, "NODATA_value {}", grid.nodata());
    for row in grid.values().chunks(g.n_cols) {
        for (i, &v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            if grid.is_valid_value(v) {
                let _ = write!(out, "{v:.6}");
            } else {
                let _ = write!(out, "{}", grid.nodata());
            }
        }
        out.push('\n');
    }
    out
}
