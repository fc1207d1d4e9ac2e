use super::{GridGeometry, RasterGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resampling {
    Nearest,
    Bilinear,
}

/// Fractional source position of a target cell center, in source cell-center units
/// (column to the right, row downwards). Computed in index space so that identical
/// geometries map cell centers onto exact integers.
#[inline]
fn source_coords(src: &GridGeometry, target: &GridGeometry, col: usize, row: usize) -> (f64, f64) {
    let ratio = target.cell_size / src.cell_size;
    let fx = (target.origin_x - src.origin_x) / src.cell_size + (col as f64 + 0.5) * ratio - 0.5;
    let fy = (src.top() - target.top()) / src.cell_size + (row as f64 + 0.5) * ratio - 0.5;
    (fx, fy)
}

/// Samples `src` onto `target`.
///
/// Nearest takes the cell containing each target center, nodata included. Bilinear
/// needs every neighbor that carries weight to be valid; otherwise it falls back to
/// the nearest valid cell among those neighbors, else nodata. Target centers that
/// fall outside the source extent are nodata for both methods.
pub fn resample(src: &RasterGrid, target: &GridGeometry, method: Resampling) -> RasterGrid {
    let sg = src.geometry();
    let nodata = src.nodata();
    let (w, h) = (sg.n_cols as f64, sg.n_rows as f64);
    RasterGrid::from_fn(*target, nodata, |cell| {
        let (fx, fy) = source_coords(sg, target, cell.col, cell.row);
        if !(fx >= -0.5 && fx < w - 0.5 && fy >= -0.5 && fy < h - 0.5) {
            return nodata;
        }
        match method {
            Resampling::Nearest => {
                let c = (fx + 0.5).floor() as usize;
                let r = (fy + 0.5).floor() as usize;
                src.get(c.min(sg.n_cols - 1), r.min(sg.n_rows - 1))
            }
            Resampling::Bilinear => bilinear_at(src, fx, fy).unwrap_or(nodata),
        }
    })
}

/// Bilinear sample at a fractional cell-center position, with the nearest-valid fallback.
pub(crate) fn bilinear_at(src: &RasterGrid, fx: f64, fy: f64) -> Option<f64> {
    let c0 = fx.floor();
    let r0 = fy.floor();
    let tx = fx - c0;
    let ty = fy - r0;
    let (c0, r0) = (c0 as i64, r0 as i64);
    let corners = [
        (c0, r0, (1.0 - tx) * (1.0 - ty), tx * tx + ty * ty),
        (c0 + 1, r0, tx * (1.0 - ty), (1.0 - tx).powi(2) + ty * ty),
        (c0, r0 + 1, (1.0 - tx) * ty, tx * tx + (1.0 - ty).powi(2)),
        (c0 + 1, r0 + 1, tx * ty, (1.0 - tx).powi(2) + (1.0 - ty).powi(2)),
    ];
    let sample = |c: i64, r: i64| -> Option<f64> {
        if c < 0 || r < 0 || c as usize >= src.n_cols() || r as usize >= src.n_rows() {
            return None;
        }
        src.sample(c as usize, r as usize)
    };

    let mut acc = 0.0;
    let mut complete = true;
    for &(c, r, wgt, _) in &corners {
        if wgt == 0.0 {
            continue;
        }
        match sample(c, r) {
            Some(v) => acc += wgt * v,
            None => {
                complete = false;
                break;
            }
        }
    }
    if complete {
        return Some(acc);
    }

    let mut best: Option<(f64, f64)> = None;
    for &(c, r, wgt, d2) in &corners {
        if wgt == 0.0 {
            continue;
        }
        if let Some(v) = sample(c, r) {
            if best.map_or(true, |(bd, _)| d2 < bd) {
                best = Some((d2, v));
            }
        }
    }
    best.map(|(_, v)| v)
}
