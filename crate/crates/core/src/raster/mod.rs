//! Georeferenced single-band grids.
//!
//! Conventions used throughout the crate:
//!
//! - `origin_x`/`origin_y` locate the lower-left corner of the lower-left cell.
//! - Values are stored row-major, top row first, so row 0 is the northernmost row.
//! - A cell covers `[x0, x0 + cell_size)` by `[y0, y0 + cell_size)`; the right and top
//!   edges of the grid are outside it.

mod ascii;
mod pgm;
mod resample;

pub use ascii::{parse_asc, read_asc, to_asc_string, write_asc};
pub use pgm::to_pgm;
pub use resample::{resample, Resampling};

use std::path::PathBuf;
use thiserror::Error;

/// Default nodata sentinel for ASCII grids.
pub const DEFAULT_NODATA: f64 = -9999.0;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("invalid grid geometry: {0}")]
    InvalidGeometry(String),
    #[error("value count {found} does not match {n_cols}x{n_rows} grid")]
    ValueCount {
        found: usize,
        n_cols: usize,
        n_rows: usize,
    },
    #[error("malformed header at line {line}: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("row {row} has {found} values, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} data rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("unparseable number {token:?} at line {line}")]
    BadNumber { line: usize, token: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Placement and size of a grid with square cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub n_cols: usize,
    pub n_rows: usize,
}

/// Zero-based cell address; row 0 is the top row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub col: usize,
    pub row: usize,
}

impl CellIndex {
    pub fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

impl GridGeometry {
    pub fn new(
        origin_x: f64,
        origin_y: f64,
        cell_size: f64,
        n_cols: usize,
        n_rows: usize,
    ) -> Result<Self, RasterError> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(RasterError::InvalidGeometry(format!(
                "cell size must be positive, got {cell_size}"
            )));
        }
        if !(origin_x.is_finite() && origin_y.is_finite()) {
            return Err(RasterError::InvalidGeometry("origin must be finite".into()));
        }
        if n_cols == 0 || n_rows == 0 {
            return Err(RasterError::InvalidGeometry(format!(
                "grid must have at least one cell, got {n_cols}x{n_rows}"
            )));
        }
        Ok(Self {
            origin_x,
            origin_y,
            cell_size,
            n_cols,
            n_rows,
        })
    }

    pub fn len(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// World y of the top edge.
    pub fn top(&self) -> f64 {
        self.origin_y + self.n_rows as f64 * self.cell_size
    }

    /// World x of the right edge.
    pub fn right(&self) -> f64 {
        self.origin_x + self.n_cols as f64 * self.cell_size
    }

    /// Cell containing the world point, or `None` when it falls outside the grid.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<CellIndex> {
        let fc = ((x - self.origin_x) / self.cell_size).floor();
        let fr = ((y - self.origin_y) / self.cell_size).floor();
        if !(fc >= 0.0 && fr >= 0.0) {
            return None;
        }
        let (col, row_up) = (fc as usize, fr as usize);
        if col >= self.n_cols || row_up >= self.n_rows {
            return None;
        }
        Some(CellIndex::new(col, self.n_rows - 1 - row_up))
    }

    pub fn cell_center(&self, cell: CellIndex) -> (f64, f64) {
        let x = self.origin_x + (cell.col as f64 + 0.5) * self.cell_size;
        let y = self.origin_y + ((self.n_rows - 1 - cell.row) as f64 + 0.5) * self.cell_size;
        (x, y)
    }

    pub fn index(&self, cell: CellIndex) -> usize {
        cell.row * self.n_cols + cell.col
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        cell.col < self.n_cols && cell.row < self.n_rows
    }

    /// Center of the grid in world coordinates.
    pub fn center(&self) -> (f64, f64) {
        (
            self.origin_x + 0.5 * self.n_cols as f64 * self.cell_size,
            self.origin_y + 0.5 * self.n_rows as f64 * self.cell_size,
        )
    }
}

/// Single-band grid of heights or intensities with a nodata sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    geometry: GridGeometry,
    values: Vec<f64>,
    nodata: f64,
}

impl RasterGrid {
    pub fn new(geometry: GridGeometry, values: Vec<f64>, nodata: f64) -> Result<Self, RasterError> {
        if values.len() != geometry.len() {
            return Err(RasterError::ValueCount {
                found: values.len(),
                n_cols: geometry.n_cols,
                n_rows: geometry.n_rows,
            });
        }
        Ok(Self {
            geometry,
            values,
            nodata,
        })
    }

    pub fn filled(geometry: GridGeometry, value: f64, nodata: f64) -> Self {
        Self {
            geometry,
            values: vec![value; geometry.len()],
            nodata,
        }
    }

    pub fn from_fn(
        geometry: GridGeometry,
        nodata: f64,
        mut f: impl FnMut(CellIndex) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(geometry.len());
        for row in 0..geometry.n_rows {
            for col in 0..geometry.n_cols {
                values.push(f(CellIndex::new(col, row)));
            }
        }
        Self {
            geometry,
            values,
            nodata,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn nodata(&self) -> f64 {
        self.nodata
    }

    pub fn n_cols(&self) -> usize {
        self.geometry.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.geometry.n_rows
    }

    /// Whether `v` is a usable sample under this grid's sentinel.
    #[inline]
    pub fn is_valid_value(&self, v: f64) -> bool {
        v.is_finite() && v != self.nodata
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.geometry.n_cols + col]
    }

    /// Sample at a cell, `None` for nodata.
    #[inline]
    pub fn sample(&self, col: usize, row: usize) -> Option<f64> {
        let v = self.get(col, row);
        self.is_valid_value(v).then_some(v)
    }

    pub fn set(&mut self, col: usize, row: usize, v: f64) {
        let n = self.geometry.n_cols;
        self.values[row * n + col] = v;
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&v| self.is_valid_value(v)).count()
    }

    /// Minimum and maximum over valid cells.
    pub fn valid_range(&self) -> Option<(f64, f64)> {
        self.values
            .iter()
            .copied()
            .filter(|&v| self.is_valid_value(v))
            .fold(None, |acc, v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }

    pub fn valid_mean(&self) -> Option<f64> {
        let (sum, n) = self
            .values
            .iter()
            .filter(|&&v| self.is_valid_value(v))
            .fold((0.0, 0usize), |(s, n), &v| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    /// Adds `offset` to every valid cell.
    pub fn offset_valid(&self, offset: f64) -> Self {
        let mut out = self.clone();
        let nodata = self.nodata;
        for v in out.values.iter_mut() {
            if v.is_finite() && *v != nodata {
                *v += offset;
            }
        }
        out
    }

    /// Maps the valid range onto 0–255 when it is not already inside it.
    ///
    /// Intensities already on an 8-bit scale are returned unchanged.
    pub fn to_gray_scale(&self) -> Self {
        let Some((lo, hi)) = self.valid_range() else {
            return self.clone();
        };
        if lo >= 0.0 && hi <= 255.0 {
            return self.clone();
        }
        let span = hi - lo;
        let mut out = self.clone();
        let nodata = self.nodata;
        for v in out.values.iter_mut() {
            if v.is_finite() && *v != nodata {
                *v = if span > 0.0 { (*v - lo) / span * 255.0 } else { 0.0 };
            }
        }
        out
    }
}
