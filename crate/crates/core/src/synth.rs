//! Deterministic synthetic scenes, degraded depth layers and sensor models.
//!
//! Random draws use ChaCha8 seeded from the spec seed, with one independent stream per
//! purpose (noise, spikes, holes, texture), so outputs are bit-identical across runs,
//! platforms and thread counts.

use crate::raster::{GridGeometry, RasterError, RasterGrid, DEFAULT_NODATA};
use crate::rpc::{GroundScale, Normalization, RpcError, RpcModel, N_TERMS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::path::Path;
use thiserror::Error;

const STREAM_NOISE: u64 = 1;
const STREAM_SPIKES: u64 = 2;
const STREAM_HOLES: u64 = 3;
const STREAM_TEXTURE: u64 = 4;
const STREAM_RPC: u64 = 5;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("scene spec line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

fn stream(seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

/// Rectangular building prism; `col`/`row` address its top-left cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Building {
    pub col: usize,
    pub row: usize,
    pub n_cols: usize,
    pub n_rows: usize,
    /// Height above ground, meters.
    pub height: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    pub origin_x: f64,
    pub origin_y: f64,
    pub ground_height: f64,
    pub ground_intensity: f64,
    /// Standard deviation of Gaussian intensity texture, gray levels.
    pub intensity_noise: f64,
    /// Later buildings overwrite earlier ones where footprints overlap.
    pub buildings: Vec<Building>,
}

impl SceneSpec {
    pub fn flat(seed: u64, width: usize, height: usize, ground_height: f64) -> Self {
        Self {
            seed,
            width,
            height,
            cell_size: 1.0,
            origin_x: 0.0,
            origin_y: 0.0,
            ground_height,
            ground_intensity: 128.0,
            intensity_noise: 0.0,
            buildings: Vec::new(),
        }
    }

    pub fn geometry(&self) -> Result<GridGeometry, SynthError> {
        Ok(GridGeometry::new(
            self.origin_x,
            self.origin_y,
            self.cell_size,
            self.width,
            self.height,
        )?)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        self.geometry()?;
        if !(self.intensity_noise >= 0.0) {
            return Err(SynthError::InvalidSpec("intensity_noise must be ≥ 0".into()));
        }
        for (i, b) in self.buildings.iter().enumerate() {
            if b.n_cols == 0
                || b.n_rows == 0
                || b.col + b.n_cols > self.width
                || b.row + b.n_rows > self.height
            {
                return Err(SynthError::InvalidSpec(format!(
                    "building {i} footprint lies outside the {}x{} scene",
                    self.width, self.height
                )));
            }
            if !(b.height >= 0.0) {
                return Err(SynthError::InvalidSpec(format!(
                    "building {i} has negative height"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradeSpec {
    pub seed: u64,
    pub gaussian_sigma: f64,
    pub spike_prob: f64,
    pub spike_amp: f64,
    pub hole_prob: f64,
}

impl DegradeSpec {
    pub fn clean(seed: u64) -> Self {
        Self {
            seed,
            gaussian_sigma: 0.0,
            spike_prob: 0.0,
            spike_amp: 0.0,
            hole_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.gaussian_sigma >= 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(SynthError::InvalidSpec("gaussian_sigma must be ≥ 0".into()));
        }
        for (name, p) in [("spike_prob", self.spike_prob), ("hole_prob", self.hole_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidSpec(format!("{name} must lie in [0, 1]")));
            }
        }
        if !self.spike_amp.is_finite() {
            return Err(SynthError::InvalidSpec("spike_amp must be finite".into()));
        }
        Ok(())
    }
}

/// Ground-truth DSM and matching intensity grid.
pub fn gen_scene(spec: &SceneSpec) -> Result<(RasterGrid, RasterGrid), SynthError> {
    spec.validate()?;
    let g = spec.geometry()?;
    let mut dsm = RasterGrid::filled(g, spec.ground_height, DEFAULT_NODATA);
    let mut ortho = RasterGrid::filled(g, spec.ground_intensity, DEFAULT_NODATA);
    for b in &spec.buildings {
        for row in b.row..b.row + b.n_rows {
            for col in b.col..b.col + b.n_cols {
                dsm.set(col, row, spec.ground_height + b.height);
                ortho.set(col, row, b.intensity);
            }
        }
    }
    if spec.intensity_noise > 0.0 {
        let mut rng = stream(spec.seed, STREAM_TEXTURE);
        for v in ortho.values_mut() {
            let n: f64 = StandardNormal.sample(&mut rng);
            *v = (*v + spec.intensity_noise * n).clamp(0.0, 255.0);
        }
    }
    Ok((dsm, ortho))
}

/// Noisy copy of `truth`: Gaussian noise, then spikes of ±`spike_amp` around the true
/// value, then holes. Every cell consumes the same number of draws from each stream,
/// whatever its content, so masks depend only on seed and grid size.
pub fn degrade(truth: &RasterGrid, spec: &DegradeSpec) -> Result<RasterGrid, SynthError> {
    spec.validate()?;
    let mut noise = stream(spec.seed, STREAM_NOISE);
    let mut spikes = stream(spec.seed, STREAM_SPIKES);
    let mut holes = stream(spec.seed, STREAM_HOLES);
    let mut out = truth.clone();
    let nodata = truth.nodata();
    for v in out.values_mut() {
        let n: f64 = StandardNormal.sample(&mut noise);
        let spike_draw: f64 = spikes.gen();
        let spike_up: bool = spikes.gen();
        let hole_draw: f64 = holes.gen();
        if !(v.is_finite() && *v != nodata) {
            continue;
        }
        let base = *v;
        if spec.gaussian_sigma > 0.0 {
            *v = base + spec.gaussian_sigma * n;
        }
        if spike_draw < spec.spike_prob {
            *v = if spike_up {
                base + spec.spike_amp
            } else {
                base - spec.spike_amp
            };
        }
        if hole_draw < spec.hole_prob {
            *v = nodata;
        }
    }
    Ok(out)
}

/// `n` layers of decreasing quality: the noise sigma rises linearly from `sigma_first`
/// to `sigma_last`; layer `i` uses seed `base.seed + i` and `base`'s other rates.
pub fn quality_ladder(
    truth: &RasterGrid,
    n: usize,
    sigma_first: f64,
    sigma_last: f64,
    base: &DegradeSpec,
) -> Result<Vec<RasterGrid>, SynthError> {
    (0..n)
        .map(|i| {
            let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let spec = DegradeSpec {
                seed: base.seed.wrapping_add(i as u64),
                gaussian_sigma: sigma_first + t * (sigma_last - sigma_first),
                ..*base
            };
            degrade(truth, &spec)
        })
        .collect()
}

/// Parses a scene spec from `key=value` lines (`#` starts a comment). Each
/// `building=col,row,n_cols,n_rows,height,intensity` line adds one building.
pub fn parse_scene_spec(text: &str) -> Result<SceneSpec, SynthError> {
    let mut spec = SceneSpec::flat(0, 0, 0, 0.0);
    let (mut have_w, mut have_h) = (false, false);
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| SynthError::Parse {
            line: line_no,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected key=value".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| -> Result<f64, SynthError> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| err(format!("bad number {v:?} for {key}")))
        };
        let count = |v: &str| -> Result<usize, SynthError> {
            v.trim()
                .parse::<usize>()
                .map_err(|_| err(format!("bad count {v:?} for {key}")))
        };
        match key {
            "seed" => {
                spec.seed = value
                    .parse()
                    .map_err(|_| err(format!("bad seed {value:?}")))?
            }
            "width" => {
                spec.width = count(value)?;
                have_w = true;
            }
            "height" => {
                spec.height = count(value)?;
                have_h = true;
            }
            "cell_size" => spec.cell_size = num(value)?,
            "origin_x" => spec.origin_x = num(value)?,
            "origin_y" => spec.origin_y = num(value)?,
            "ground_height" => spec.ground_height = num(value)?,
            "ground_intensity" => spec.ground_intensity = num(value)?,
            "intensity_noise" => spec.intensity_noise = num(value)?,
            "building" => {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != 6 {
                    return Err(err(
                        "building needs col,row,n_cols,n_rows,height,intensity".into(),
                    ));
                }
                spec.buildings.push(Building {
                    col: count(parts[0])?,
                    row: count(parts[1])?,
                    n_cols: count(parts[2])?,
                    n_rows: count(parts[3])?,
                    height: num(parts[4])?,
                    intensity: num(parts[5])?,
                });
            }
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    if !(have_w && have_h) {
        return Err(SynthError::InvalidSpec("width and height are required".into()));
    }
    spec.validate()?;
    Ok(spec)
}

pub fn read_scene_spec(path: impl AsRef<Path>) -> Result<SceneSpec, SynthError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scene_spec(&text)
}

/// Affine RPC model whose viewing ray leaves the ground `off_nadir_deg` from vertical,
/// tilted towards azimuth `azimuth_deg` (0 = +u, 90 = +v).
pub fn oblique_rpc(
    norm: Normalization,
    off_nadir_deg: f64,
    azimuth_deg: f64,
    scale: GroundScale,
) -> Result<RpcModel, RpcError> {
    let tan = off_nadir_deg.to_radians().tan();
    let (sin_az, cos_az) = azimuth_deg.to_radians().sin_cos();
    let k_u = tan * cos_az * norm.z_scale / (scale.meters_per_u * norm.u_scale);
    let k_v = tan * sin_az * norm.z_scale / (scale.meters_per_v * norm.v_scale);
    RpcModel::affine(norm, [0.0, 1.0, 0.0, -k_u], [0.0, 0.0, 1.0, -k_v])
}

/// Normalization resembling a geographic very-high-resolution scene.
pub fn geographic_normalization() -> Normalization {
    Normalization {
        samp_off: 17_500.0,
        samp_scale: 17_500.5,
        line_off: 20_000.0,
        line_scale: 20_000.5,
        u_off: -117.55,
        u_scale: 0.08,
        v_off: 34.27,
        v_scale: 0.07,
        z_off: 400.0,
        z_scale: 500.0,
    }
}

/// Well-conditioned random cubic RPC model: near-identity linear part with small
/// higher-order and denominator terms.
pub fn random_rpc(seed: u64, norm: Normalization) -> RpcModel {
    let mut rng = stream(seed, STREAM_RPC);
    let mut small = |amp: f64| rng.gen_range(-amp..amp);
    let mut num_s = [0.0; N_TERMS];
    let mut num_l = [0.0; N_TERMS];
    let mut den_s = [0.0; N_TERMS];
    let mut den_l = [0.0; N_TERMS];
    for i in 0..N_TERMS {
        num_s[i] = small(0.01);
        num_l[i] = small(0.01);
        den_s[i] = small(0.002);
        den_l[i] = small(0.002);
    }
    num_s[1] += 1.0;
    num_s[3] += small(0.3);
    num_l[2] -= 1.0;
    num_l[3] += small(0.3);
    den_s[0] = 1.0;
    den_l[0] = 1.0;
    RpcModel::new(num_s, den_s, num_l, den_l, norm).expect("constructed model is valid")
}
