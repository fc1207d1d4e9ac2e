use super::RasterGrid;
use std::fmt::Write as _;

/// Plain (P2) 8-bit PGM preview.
///
/// Valid cells are stretched linearly from their min–max range onto 1..=255 so that
/// gray level 0 is reserved for nodata. A constant grid renders as 255.
pub fn to_pgm(grid: &RasterGrid) -> String {
    let g = grid.geometry();
    let range = grid.valid_range();
    let mut out = String::with_capacity(g.len() * 4 + 32);
    let _ = write!(out, "P2\n{} {}\n255\n", g.n_cols, g.n_rows);
    for row in grid.values().chunks(g.n_cols) {
        for (i, &v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let level = match range {
                Some((lo, hi)) if grid.is_valid_value(v) => {
                    if hi > lo {
                        1 + ((v - lo) / (hi - lo) * 254.0).round() as u32
                    } else {
                        255
                    }
                }
                _ => 0,
            };
            let _ = write!(out, "{level}");
        }
        out.push('\n');
    }
    out
}
