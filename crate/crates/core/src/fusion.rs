//! Depth-map fusion over a stack of co-registered 2.5D grids.
//!
//! Two fusers are provided:
//!
//! - [`median_fuse`] takes the median of the valid layer heights in each cell.
//! - [`adaptive_median_fuse`] pools heights from an intensity-gated neighbourhood.
//!   Around every output cell `x0` each cell `x` of a square search window gets the
//!   bilateral weight
//!
//!   ```text
//!   W(x) = exp(-|x - x0|² / (2 δs²) - |I(x) - I(x0)|² / (2 δI²))
//!   ```
//!
//!   computed on a reference intensity grid (orthophoto). Cells with `W > γ` form the
//!   adaptive window; every valid height of every layer at those cells is a candidate,
//!   and the output is the plain median of the candidates. `W(x0) = 1` is already the
//!   maximum, so no separate normalization is applied.
//!
//! Medians of even-sized candidate sets average the two middle values. Output cells
//! are independent, so rows are processed in parallel with results identical for any
//! thread count.

use crate::raster::{CellIndex, GridGeometry, RasterGrid};
use crate::stats::median_in_place;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("depth stack is empty")]
    EmptyStack,
    #[error("layer {0} does not share the stack geometry")]
    GeometryMismatch(usize),
    #[error("intensity grid does not share the stack geometry")]
    OrthoMismatch,
    #[error("invalid fusion configuration: {0}")]
    InvalidConfig(String),
}

/// How even-sized candidate sets are reduced. Only one policy exists today.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    AverageOfMiddles,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    /// Spatial Gaussian scale, cells.
    pub delta_s: f64,
    /// Intensity Gaussian scale, gray levels on a 0–255 scale.
    pub delta_i: f64,
    /// Window membership threshold on the weight.
    pub gamma: f64,
    /// Half-width of the square search window, cells.
    pub radius: usize,
    pub tie_break: TieBreak,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            delta_s: 2.5,
            delta_i: 15.0,
            gamma: 0.5,
            radius: 3,
            tie_break: TieBreak::AverageOfMiddles,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<(), FusionError> {
        if !(self.delta_s > 0.0 && self.delta_s.is_finite()) {
            return Err(FusionError::InvalidConfig(format!(
                "delta_s must be positive, got {}",
                self.delta_s
            )));
        }
        if !(self.delta_i > 0.0 && self.delta_i.is_finite()) {
            return Err(FusionError::InvalidConfig(format!(
                "delta_i must be positive, got {}",
                self.delta_i
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(FusionError::InvalidConfig(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    #[inline]
    fn spatial_term(&self, dist2: f64) -> f64 {
        dist2 / (2.0 * self.delta_s * self.delta_s)
    }

    #[inline]
    fn intensity_term(&self, di: f64) -> f64 {
        di * di / (2.0 * self.delta_i * self.delta_i)
    }
}

/// Layers sharing one geometry.
#[derive(Debug, Clone)]
pub struct DepthStack {
    layers: Vec<RasterGrid>,
    ids: Vec<String>,
}

impl DepthStack {
    pub fn new(layers: Vec<RasterGrid>) -> Result<Self, FusionError> {
        let ids = (0..layers.len()).map(|i| format!("layer{i}")).collect();
        Self::with_ids(layers, ids)
    }

    pub fn with_ids(layers: Vec<RasterGrid>, ids: Vec<String>) -> Result<Self, FusionError> {
        let first = layers.first().ok_or(FusionError::EmptyStack)?;
        let geom = *first.geometry();
        if let Some(i) = layers.iter().position(|l| *l.geometry() != geom) {
            return Err(FusionError::GeometryMismatch(i));
        }
        assert_eq!(layers.len(), ids.len(), "one id per layer");
        Ok(Self { layers, ids })
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.layers[0].geometry()
    }

    pub fn layers(&self) -> &[RasterGrid] {
        &self.layers
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    fn nodata(&self) -> f64 {
        self.layers[0].nodata()
    }
}

/// Evaluation context of the bilateral weight around one center cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightKernel {
    pub center: CellIndex,
    /// Center intensity; `None` when the center has no intensity, in which case only
    /// the spatial term is used.
    pub center_intensity: Option<f64>,
}

/// Bilateral weight of cell `x` with intensity `intensity` relative to the kernel center.
///
/// A missing intensity on either side drops the intensity term.
pub fn weight(
    kernel: &WeightKernel,
    x: CellIndex,
    intensity: Option<f64>,
    cfg: &FusionConfig,
) -> f64 {
    let dc = x.col as f64 - kernel.center.col as f64;
    let dr = x.row as f64 - kernel.center.row as f64;
    let spatial = cfg.spatial_term(dc * dc + dr * dr);
    match (kernel.center_intensity, intensity) {
        (Some(i0), Some(i)) => (-spatial - cfg.intensity_term(i - i0)).exp(),
        _ => (-spatial).exp(),
    }
}

/// Irregular window: the cells of the search square whose weight exceeds γ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveWindow {
    pub members: Vec<CellIndex>,
}

impl AdaptiveWindow {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        self.members.contains(&cell)
    }
}

#[inline]
fn window_bounds(center: usize, radius: usize, n: usize) -> (usize, usize) {
    (center.saturating_sub(radius), (center + radius).min(n - 1))
}

/// Adaptive window of `center` on the intensity grid `ortho`.
///
/// With a valid center intensity, cells without intensity are excluded; with a
/// missing center intensity the window is gated by the spatial term alone.
pub fn adaptive_window(ortho: &RasterGrid, center: CellIndex, cfg: &FusionConfig) -> AdaptiveWindow {
    let g = ortho.geometry();
    let kernel = WeightKernel {
        center,
        center_intensity: ortho.sample(center.col, center.row),
    };
    let (c_lo, c_hi) = window_bounds(center.col, cfg.radius, g.n_cols);
    let (r_lo, r_hi) = window_bounds(center.row, cfg.radius, g.n_rows);
    let mut members = Vec::new();
    for row in r_lo..=r_hi {
        for col in c_lo..=c_hi {
            let intensity = ortho.sample(col, row);
            if kernel.center_intensity.is_some() && intensity.is_none() {
                continue;
            }
            let x = CellIndex::new(col, row);
            if weight(&kernel, x, intensity, cfg) > cfg.gamma {
                members.push(x);
            }
        }
    }
    AdaptiveWindow { members }
}

/// Per-cell median over the valid heights of all layers.
pub fn median_fuse(stack: &DepthStack) -> RasterGrid {
    let g = *stack.geometry();
    let nodata = stack.nodata();
    let mut out = vec![nodata; g.len()];
    out.par_chunks_mut(g.n_cols)
        .enumerate()
        .for_each_init(Vec::new, |candidates, (row, out_row)| {
            for (col, slot) in out_row.iter_mut().enumerate() {
                candidates.clear();
                candidates.extend(stack.layers.iter().filter_map(|l| l.sample(col, row)));
                if let Some(m) = median_in_place(candidates) {
                    *slot = m;
                }
            }
        });
    RasterGrid::new(g, out, nodata).expect("output sized from geometry")
}

/// Median over an unweighted square window of every layer (a plain windowed median
/// filter, the non-adaptive baseline).
pub fn window_median_fuse(stack: &DepthStack, radius: usize) -> RasterGrid {
    let g = *stack.geometry();
    let nodata = stack.nodata();
    let mut out = vec![nodata; g.len()];
    out.par_chunks_mut(g.n_cols)
        .enumerate()
        .for_each_init(Vec::new, |candidates, (row, out_row)| {
            let (r_lo, r_hi) = window_bounds(row, radius, g.n_rows);
            for (col, slot) in out_row.iter_mut().enumerate() {
                let (c_lo, c_hi) = window_bounds(col, radius, g.n_cols);
                candidates.clear();
                for r in r_lo..=r_hi {
                    for c in c_lo..=c_hi {
                        candidates.extend(stack.layers.iter().filter_map(|l| l.sample(c, r)));
                    }
                }
                if let Some(m) = median_in_place(candidates) {
                    *slot = m;
                }
            }
        });
    RasterGrid::new(g, out, nodata).expect("output sized from geometry")
}

/// Adaptive, intensity-gated window median fusion.
pub fn adaptive_median_fuse(
    stack: &DepthStack,
    ortho: &RasterGrid,
    cfg: &FusionConfig,
) -> Result<RasterGrid, FusionError> {
    cfg.validate()?;
    let g = *stack.geometry();
    if *ortho.geometry() != g {
        return Err(FusionError::OrthoMismatch);
    }
    let nodata = stack.nodata();
    let radius = cfg.radius as i64;

    // spatial terms of the square, indexed by (dr + radius, dc + radius)
    let side = 2 * cfg.radius + 1;
    let mut spatial = Vec::with_capacity(side * side);
    for dr in -radius..=radius {
        for dc in -radius..=radius {
            spatial.push(cfg.spatial_term((dc * dc + dr * dr) as f64));
        }
    }

    let mut out = vec![nodata; g.len()];
    out.par_chunks_mut(g.n_cols)
        .enumerate()
        .for_each_init(Vec::new, |candidates, (row, out_row)| {
            let (r_lo, r_hi) = window_bounds(row, cfg.radius, g.n_rows);
            for (col, slot) in out_row.iter_mut().enumerate() {
                let (c_lo, c_hi) = window_bounds(col, cfg.radius, g.n_cols);
                let center_intensity = ortho.sample(col, row);
                candidates.clear();
                for r in r_lo..=r_hi {
                    let sp_row = (r + cfg.radius - row) * side;
                    for c in c_lo..=c_hi {
                        let sp = spatial[sp_row + (c + cfg.radius - col)];
                        let w = match center_intensity {
                            Some(i0) => match ortho.sample(c, r) {
                                Some(i) => (-sp - cfg.intensity_term(i - i0)).exp(),
                                None => continue,
                            },
                            None => (-sp).exp(),
                        };
                        if w > cfg.gamma {
                            candidates.extend(stack.layers.iter().filter_map(|l| l.sample(c, r)));
                        }
                    }
                }
                if let Some(m) = median_in_place(candidates) {
                    *slot = m;
                }
            }
        });
    Ok(RasterGrid::new(g, out, nodata).expect("output sized from geometry"))
}
