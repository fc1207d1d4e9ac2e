mod curve;
mod eval;
mod fuse;
mod rank;
mod rpc;
mod synth;

pub use curve::curve;
pub use eval::eval;
pub use fuse::fuse;
pub use rank::rank;
pub use rpc::rpc;
pub use synth::synth;

use crate::args::{AlignFlags, FusionFlags};
use crate::error::CliError;
use dsmfuse_core::fusion::FusionConfig;
use dsmfuse_core::raster::{read_asc, resample, GridGeometry, RasterGrid, Resampling};
use dsmfuse_core::register::AlignConfig;
use std::path::{Path, PathBuf};

/// Parses `a,b,c` into exactly `N` numbers.
pub(crate) fn parse_tuple<const N: usize>(s: &str, flag: &str) -> Result<[f64; N], CliError> {
    let bad = || CliError::Config(format!("--{flag} expects {N} comma-separated numbers, got `{s}`"));
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(bad());
    }
    let mut out = [0.0f64; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| bad())?;
        if !o.is_finite() {
            return Err(bad());
        }
    }
    Ok(out)
}

pub(crate) fn parse_grid(s: &str) -> Result<GridGeometry, CliError> {
    let [x0, y0, cell, nc, nr] = parse_tuple::<5>(s, "grid")?;
    if nc.fract() != 0.0 || nr.fract() != 0.0 || nc < 1.0 || nr < 1.0 {
        return Err(CliError::Config(format!("--grid needs whole positive cell counts, got `{s}`")));
    }
    GridGeometry::new(x0, y0, cell, nc as usize, nr as usize)
        .map_err(|e| CliError::Config(format!("--grid: {e}")))
}

pub(crate) fn fusion_config(f: &FusionFlags) -> Result<FusionConfig, CliError> {
    let cfg = FusionConfig {
        delta_s: f.delta_s,
        delta_i: f.delta_i,
        gamma: f.gamma,
        radius: f.radius,
        ..FusionConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

pub(crate) fn align_config(f: &AlignFlags) -> Result<AlignConfig, CliError> {
    let cfg = AlignConfig {
        blunder_threshold: f.threshold,
        max_search: f.max_search,
        max_iterations: f.max_iterations,
        convergence_tol: f.convergence_tol,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub(crate) fn load(path: &Path) -> Result<RasterGrid, CliError> {
    Ok(read_asc(path)?)
}

/// Brings `grid` onto `target` (bilinear); an input with valid cells that all fall
/// outside the target is a geometry error.
pub(crate) fn onto(grid: RasterGrid, target: &GridGeometry, name: &Path) -> Result<RasterGrid, CliError> {
    if grid.geometry() == target {
        return Ok(grid);
    }
    let out = resample(&grid, target, Resampling::Bilinear);
    if grid.valid_count() > 0 && out.valid_count() == 0 {
        return Err(CliError::Geometry(format!(
            "{} does not overlap the output grid",
            name.display()
        )));
    }
    Ok(out)
}

/// Layers loaded and resampled onto `grid`, or onto the first layer's geometry.
pub(crate) fn load_stack(
    paths: &[PathBuf],
    grid: Option<&str>,
) -> Result<(Vec<RasterGrid>, GridGeometry), CliError> {
    let mut layers = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let target = match grid {
        Some(s) => parse_grid(s)?,
        None => *layers[0].geometry(),
    };
    layers = layers
        .into_iter()
        .zip(paths)
        .map(|(l, p)| onto(l, &target, p))
        .collect::<Result<_, _>>()?;
    Ok((layers, target))
}

/// Orthophoto as gray levels on `target`.
pub(crate) fn load_ortho(path: &Path, target: &GridGeometry) -> Result<RasterGrid, CliError> {
    onto(load(path)?.to_gray_scale(), target, path)
}

pub(crate) fn meters(v: f64) -> String {
    format!("{:.6}", v + 0.0)
}
