//! Translation-only DSM co-registration and RMSE evaluation.
//!
//! The recovered shift describes where the moving DSM sits relative to the
//! reference: `moving(p) ≈ reference(p - (dx, dy)) + dz`, with `dx` east and `dy`
//! north in meters. Subtracting it from the moving DSM aligns the two; applied as an
//! object-space bias to the moving image's RPC model it reproduces the displacement.
//!
//! Estimation runs a coarse integer-cell search followed by Gauss–Newton refinement on
//! bilinearly interpolated reference heights. The vertical offset is the mean of the
//! inlier differences, and the inlier set (|difference − dz| ≤ threshold) is rebuilt
//! on every iteration.
//!
//! All reductions are accumulated per row and then summed in row order, so results do
//! not depend on the number of worker threads.

use crate::raster::{resample, RasterGrid, Resampling};
use crate::rpc::{GroundScale, ObjectShift};
use crate::stats::median_in_place;
use rayon::prelude::*;
use thiserror::Error;

/// Minimum number of mutually valid cells needed to attempt an alignment.
pub const MIN_OVERLAP: usize = 100;

const MAX_STEP_CELLS: f64 = 1.0;

#[derive(Debug, Error)]
pub enum RegisterError {
    #[error("invalid alignment configuration: {0}")]
    InvalidConfig(String),
    #[error("insufficient overlap: {found} mutually valid cells, need {required}")]
    InsufficientOverlap { found: usize, required: usize },
    #[error("grids do not share a geometry")]
    GeometryMismatch,
    #[error("no mutually valid cells")]
    NoValidCells,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    /// Height differences beyond this (meters) are blunders.
    pub blunder_threshold: f64,
    /// Half-width of the integer search, in cells.
    pub max_search: usize,
    pub max_iterations: usize,
    /// Gauss–Newton stops when the update is below this many cells.
    pub convergence_tol: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            blunder_threshold: 6.0,
            max_search: 10,
            max_iterations: 50,
            convergence_tol: 1e-4,
        }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Result<(), RegisterError> {
        if !(self.blunder_threshold > 0.0 && self.blunder_threshold.is_finite()) {
            return Err(RegisterError::InvalidConfig(format!(
                "blunder threshold must be positive, got {}",
                self.blunder_threshold
            )));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(RegisterError::InvalidConfig(
                "convergence tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentResult {
    /// East displacement of the moving DSM, meters.
    pub dx: f64,
    /// North displacement of the moving DSM, meters.
    pub dy: f64,
    /// Vertical offset of the moving DSM, meters.
    pub dz: f64,
    pub rmse_inliers: f64,
    /// RMSE over every compared cell, blunders included.
    pub rmse_all: f64,
    pub n_inliers: usize,
    pub n_total: usize,
    pub converged: bool,
    /// Cell size of the reference grid the shift was estimated on.
    pub cell_size: f64,
}

impl AlignmentResult {
    /// Horizontal shift in reference cells, (east, north).
    pub fn shift_cells(&self) -> (f64, f64) {
        (self.dx / self.cell_size, self.dy / self.cell_size)
    }

    /// The displacement expressed as an object-space RPC bias in ground units.
    pub fn object_shift(&self, scale: GroundScale) -> ObjectShift {
        ObjectShift::new(
            self.dx / scale.meters_per_u,
            self.dy / scale.meters_per_v,
            self.dz,
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    diff: f64,
    gx: f64,
    gy: f64,
}

/// Bilinear sample requiring every neighbor with nonzero weight to be valid.
#[inline]
fn bilinear_strict(grid: &RasterGrid, fx: f64, fy: f64) -> Option<f64> {
    let c0 = fx.floor();
    let r0 = fy.floor();
    let (tx, ty) = (fx - c0, fy - r0);
    if c0 < 0.0 || r0 < 0.0 {
        return None;
    }
    let (c0, r0) = (c0 as usize, r0 as usize);
    let (n_cols, n_rows) = (grid.n_cols(), grid.n_rows());
    let mut acc = 0.0;
    for (dc, dr, w) in [
        (0, 0, (1.0 - tx) * (1.0 - ty)),
        (1, 0, tx * (1.0 - ty)),
        (0, 1, (1.0 - tx) * ty),
        (1, 1, tx * ty),
    ] {
        if w == 0.0 {
            continue;
        }
        let (c, r) = (c0 + dc, r0 + dr);
        if c >= n_cols || r >= n_rows {
            return None;
        }
        acc += w * grid.sample(c, r)?;
    }
    Some(acc)
}

/// Differences `moving(q) - reference(q - shift)` for every comparable cell, where
/// `shift = (a, b)` is in (column, row) cell units.
fn differences(moving: &RasterGrid, reference: &RasterGrid, a: f64, b: f64, grad: bool) -> Vec<Sample> {
    let n_cols = moving.n_cols();
    let rows: Vec<Vec<Sample>> = (0..moving.n_rows())
        .into_par_iter()
        .map(|row| {
            let mut out = Vec::new();
            for col in 0..n_cols {
                let Some(m) = moving.sample(col, row) else {
                    continue;
                };
                let fx = col as f64 - a;
                let fy = row as f64 - b;
                let Some(r) = bilinear_strict(reference, fx, fy) else {
                    continue;
                };
                let (gx, gy) = if grad {
                    let g = (|| {
                        let xp = bilinear_strict(reference, fx + 1.0, fy)?;
                        let xm = bilinear_strict(reference, fx - 1.0, fy)?;
                        let yp = bilinear_strict(reference, fx, fy + 1.0)?;
                        let ym = bilinear_strict(reference, fx, fy - 1.0)?;
                        Some(((xp - xm) / 2.0, (yp - ym) / 2.0))
                    })();
                    match g {
                        Some(g) => g,
                        None => continue,
                    }
                } else {
                    (0.0, 0.0)
                };
                out.push(Sample { diff: m - r, gx, gy });
            }
            out
        })
        .collect();
    rows.into_iter().flatten().collect()
}

#[derive(Debug, Clone, Copy)]
struct OffsetFit {
    dz: f64,
    n_inliers: usize,
    rmse_inliers: f64,
    /// Mean truncated squared residual: blunders count as `threshold²`.
    cost: f64,
}

/// Vertical offset as the mean of inlier differences, iterated from the median
/// until the inlier set settles.
fn fit_offset(samples: &[Sample], threshold: f64, start: Option<f64>) -> Option<OffsetFit> {
    if samples.is_empty() {
        return None;
    }
    let mut dz = match start {
        Some(dz) => dz,
        None => {
            let mut diffs: Vec<f64> = samples.iter().map(|s| s.diff).collect();
            median_in_place(&mut diffs)?
        }
    };
    let mut prev_n = usize::MAX;
    for _ in 0..100 {
        let (sum, n) = samples
            .iter()
            .filter(|s| (s.diff - dz).abs() <= threshold)
            .fold((0.0, 0usize), |(acc, n), s| (acc + s.diff, n + 1));
        if n == 0 {
            return None;
        }
        let next = sum / n as f64;
        let settled = n == prev_n && next == dz;
        dz = next;
        prev_n = n;
        if settled {
            break;
        }
    }
    let (sq, n) = samples
        .iter()
        .filter(|s| (s.diff - dz).abs() <= threshold)
        .fold((0.0, 0usize), |(acc, n), s| (acc + (s.diff - dz).powi(2), n + 1));
    if n == 0 {
        return None;
    }
    let n_out = samples.len() - n;
    Some(OffsetFit {
        dz,
        n_inliers: n,
        rmse_inliers: (sq / n as f64).sqrt(),
        cost: (sq + n_out as f64 * threshold * threshold) / samples.len() as f64,
    })
}

fn mutual_valid(a: &RasterGrid, b: &RasterGrid) -> usize {
    a.values()
        .iter()
        .zip(b.values())
        .filter(|(&x, &y)| a.is_valid_value(x) && b.is_valid_value(y))
        .count()
}

/// Estimates the translation of `moving` relative to `reference`.
///
/// `moving` is first resampled (bilinear) onto the reference geometry. When the
/// refinement exhausts its iterations the best estimate found is returned with
/// `converged = false`.
pub fn align(
    moving: &RasterGrid,
    reference: &RasterGrid,
    cfg: &AlignConfig,
) -> Result<AlignmentResult, RegisterError> {
    cfg.validate()?;
    let resampled;
    let moving = if moving.geometry() == reference.geometry() {
        moving
    } else {
        resampled = resample(moving, reference.geometry(), Resampling::Bilinear);
        &resampled
    };
    let overlap = mutual_valid(moving, reference);
    if overlap < MIN_OVERLAP {
        return Err(RegisterError::InsufficientOverlap {
            found: overlap,
            required: MIN_OVERLAP,
        });
    }
    let thr = cfg.blunder_threshold;

    // Coarse integer search on the truncated quadratic cost. Plain inlier RMSE is
    // degenerate on piecewise-flat scenes, where many wrong shifts reject every
    // mismatched cell and fit the rest perfectly.
    let s = cfg.max_search as i64;
    let mut best: Option<(f64, f64, OffsetFit)> = None;
    for b in -s..=s {
        for a in -s..=s {
            let (a, b) = (a as f64, b as f64);
            let samples = differences(moving, reference, a, b, false);
            let Some(fit) = fit_offset(&samples, thr, None) else {
                continue;
            };
            if fit.n_inliers < MIN_OVERLAP || 2 * fit.n_inliers < samples.len() {
                continue;
            }
            let better = match &best {
                None => true,
                Some((ba, bb, bf)) => {
                    fit.cost < bf.cost
                        || (fit.cost == bf.cost && a * a + b * b < ba * ba + bb * bb)
                }
            };
            if better {
                best = Some((a, b, fit));
            }
        }
    }
    let Some((mut a, mut b, coarse)) = best else {
        return Err(RegisterError::InsufficientOverlap {
            found: overlap,
            required: MIN_OVERLAP,
        });
    };

    // sub-cell refinement
    let mut dz = coarse.dz;
    let mut converged = false;
    let mut best_params = (a, b, coarse.cost);
    for _ in 0..cfg.max_iterations {
        let samples = differences(moving, reference, a, b, true);
        let Some(fit) = fit_offset(&samples, thr, Some(dz)) else {
            break;
        };
        dz = fit.dz;
        if fit.n_inliers >= MIN_OVERLAP && fit.cost <= best_params.2 {
            best_params = (a, b, fit.cost);
        }
        let inliers: Vec<&Sample> = samples
            .iter()
            .filter(|s| (s.diff - dz).abs() <= thr)
            .collect();
        let n = inliers.len() as f64;
        let (mgx, mgy, me) = inliers.iter().fold((0.0, 0.0, 0.0), |acc, s| {
            (acc.0 + s.gx, acc.1 + s.gy, acc.2 + s.diff)
        });
        let (mgx, mgy, me) = (mgx / n, mgy / n, me / n);
        let (mut hxx, mut hxy, mut hyy, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for s in &inliers {
            let (gx, gy, e) = (s.gx - mgx, s.gy - mgy, s.diff - me);
            hxx += gx * gx;
            hxy += gx * gy;
            hyy += gy * gy;
            bx += gx * e;
            by += gy * e;
        }
        let det = hxx * hyy - hxy * hxy;
        if !(det.abs() > 1e-12 * (hxx * hyy).max(1e-300)) {
            // flat surface: no horizontal information
            converged = true;
            break;
        }
        let mut step_a = -(hyy * bx - hxy * by) / det;
        let mut step_b = -(hxx * by - hxy * bx) / det;
        let norm = step_a.hypot(step_b);
        if norm > MAX_STEP_CELLS {
            step_a *= MAX_STEP_CELLS / norm;
            step_b *= MAX_STEP_CELLS / norm;
        }
        a += step_a;
        b += step_b;
        if norm < cfg.convergence_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        a = best_params.0;
        b = best_params.1;
    }

    let samples = differences(moving, reference, a, b, false);
    let fit = fit_offset(&samples, thr, Some(dz)).ok_or(RegisterError::NoValidCells)?;
    let sq_all: f64 = samples.iter().map(|s| (s.diff - fit.dz).powi(2)).sum();
    let cell = reference.geometry().cell_size;
    Ok(AlignmentResult {
        dx: a * cell + 0.0,
        dy: -b * cell + 0.0,
        dz: fit.dz,
        rmse_inliers: fit.rmse_inliers,
        rmse_all: (sq_all / samples.len() as f64).sqrt(),
        n_inliers: fit.n_inliers,
        n_total: samples.len(),
        converged,
        cell_size: cell,
    })
}

/// Root mean square height difference over mutually valid cells, with the number of
/// cells used. With `include_blunders` false, cells whose |difference| exceeds
/// `threshold` are left out.
pub fn rmse(
    a: &RasterGrid,
    b: &RasterGrid,
    include_blunders: bool,
    threshold: f64,
) -> Result<(f64, usize), RegisterError> {
    if a.geometry() != b.geometry() {
        return Err(RegisterError::GeometryMismatch);
    }
    let n_cols = a.n_cols();
    let rows: Vec<(f64, usize)> = a
        .values()
        .par_chunks(n_cols)
        .zip(b.values().par_chunks(n_cols))
        .map(|(ra, rb)| {
            let mut sum = 0.0;
            let mut n = 0usize;
            for (&x, &y) in ra.iter().zip(rb) {
                if !(a.is_valid_value(x) && b.is_valid_value(y)) {
                    continue;
                }
                let d = x - y;
                if !include_blunders && d.abs() > threshold {
                    continue;
                }
                sum += d * d;
                n += 1;
            }
            (sum, n)
        })
        .collect();
    let (sum, n) = rows
        .into_iter()
        .fold((0.0, 0usize), |(s, c), (rs, rc)| (s + rs, c + rc));
    if n == 0 {
        return Err(RegisterError::NoValidCells);
    }
    Ok(((sum / n as f64).sqrt(), n))
}

/// Translates `grid` by the alignment so it lands on `reference`'s geometry:
/// horizontal shift removed by resampling, vertical offset subtracted.
pub fn apply_alignment(
    grid: &RasterGrid,
    reference: &crate::raster::GridGeometry,
    shift: &AlignmentResult,
) -> RasterGrid {
    let g = *reference;
    let moved = crate::raster::GridGeometry {
        origin_x: g.origin_x + shift.dx,
        origin_y: g.origin_y + shift.dy,
        ..g
    };
    let sampled = resample(grid, &moved, Resampling::Bilinear);
    let mut out = RasterGrid::new(g, sampled.into_values(), grid.nodata())
        .expect("geometry sizes agree");
    out = out.offset_valid(-shift.dz);
    out
}
