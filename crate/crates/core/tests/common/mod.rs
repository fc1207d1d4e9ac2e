#![allow(dead_code)]

use dsmfuse_core::fusion::FusionConfig;
use dsmfuse_core::raster::{GridGeometry, RasterGrid, DEFAULT_NODATA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ND: f64 = DEFAULT_NODATA;

/// Random stack, intensity grid and configuration for oracle comparisons.
pub struct Instance {
    pub layers: Vec<RasterGrid>,
    pub ortho: RasterGrid,
    pub cfg: FusionConfig,
}

pub fn random_instance(seed: u64, max_side: usize, max_layers: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_cols = rng.gen_range(1..=max_side);
    let n_rows = rng.gen_range(1..=max_side);
    let g = GridGeometry::new(0.0, 0.0, 1.0, n_cols, n_rows).unwrap();
    let n_layers = rng.gen_range(1..=max_layers);
    let layers = (0..n_layers)
        .map(|_| {
            RasterGrid::from_fn(g, ND, |_| {
                if rng.gen_bool(0.1) {
                    ND
                } else {
                    // coarse quantization produces ties
                    (rng.gen_range(0.0..40.0f64) * 4.0).round() / 4.0
                }
            })
        })
        .collect();
    let ortho = RasterGrid::from_fn(g, ND, |_| {
        if rng.gen_bool(0.05) {
            ND
        } else {
            (rng.gen_range(0..8) * 30) as f64 + rng.gen_range(-5.0..5.0)
        }
    });
    let cfg = FusionConfig {
        delta_s: rng.gen_range(0.5..4.0),
        delta_i: rng.gen_range(2.0..40.0),
        gamma: rng.gen_range(0.05..0.95),
        radius: rng.gen_range(0..=3),
        ..FusionConfig::default()
    };
    Instance { layers, ortho, cfg }
}

fn oracle_median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

fn valid(v: f64) -> bool {
    v.is_finite() && v != ND
}

/// Direct evaluation of the adaptive fusion definition: for every output cell, every
/// cell of the square window, every layer.
pub fn oracle_adaptive(layers: &[RasterGrid], ortho: &RasterGrid, cfg: &FusionConfig) -> Vec<f64> {
    let g = *layers[0].geometry();
    let (w, h) = (g.n_cols as i64, g.n_rows as i64);
    let r = cfg.radius as i64;
    let mut out = Vec::with_capacity(g.len());
    for row in 0..h {
        for col in 0..w {
            let i0 = ortho.get(col as usize, row as usize);
            let mut cand = Vec::new();
            for y in row - r..=row + r {
                for x in col - r..=col + r {
                    if x < 0 || y < 0 || x >= w || y >= h {
                        continue;
                    }
                    let d2 = ((x - col) * (x - col) + (y - row) * (y - row)) as f64;
                    let i = ortho.get(x as usize, y as usize);
                    let wgt = if valid(i0) {
                        if !valid(i) {
                            continue;
                        }
                        let di = i - i0;
                        (-(d2 / (2.0 * cfg.delta_s * cfg.delta_s))
                            - di * di / (2.0 * cfg.delta_i * cfg.delta_i))
                            .exp()
                    } else {
                        (-(d2 / (2.0 * cfg.delta_s * cfg.delta_s))).exp()
                    };
                    if wgt <= cfg.gamma {
                        continue;
                    }
                    for layer in layers {
                        let v = layer.get(x as usize, y as usize);
                        if valid(v) {
                            cand.push(v);
                        }
                    }
                }
            }
            out.push(oracle_median(cand).unwrap_or(ND));
        }
    }
    out
}

/// Per-cell median over layers, computed directly.
pub fn oracle_median_fuse(layers: &[RasterGrid]) -> Vec<f64> {
    let g = *layers[0].geometry();
    (0..g.len())
        .map(|i| {
            let cand: Vec<f64> = layers
                .iter()
                .map(|l| l.values()[i])
                .filter(|&v| valid(v))
                .collect();
            oracle_median(cand).unwrap_or(ND)
        })
        .collect()
}

/// Bit-level equality, so that NaN or signed-zero differences are not masked.
pub fn bits_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}
