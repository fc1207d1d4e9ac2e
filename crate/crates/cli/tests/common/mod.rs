#![allow(dead_code)]

pub mod oracle;

use dsmfuse_core::raster::{write_asc, RasterGrid};
use dsmfuse_core::rpc::{to_rpc_string, GroundScale, RpcModel};
use dsmfuse_core::synth::{
    degrade, gen_scene, geographic_normalization, oblique_rpc, Building, DegradeSpec, SceneSpec,
};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dsmfuse"));
    c.env("RUST_LOG", "warn");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn write_grid(dir: &Path, name: &str, g: &RasterGrid) -> PathBuf {
    let p = dir.join(name);
    write_asc(&p, g).unwrap();
    p
}

pub fn write_rpc(dir: &Path, name: &str, m: &RpcModel) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, to_rpc_string(m)).unwrap();
    p
}

/// Flat ground with a few rectangular buildings; roofs are much brighter than the
/// textured ground.
pub fn city_spec(seed: u64, size: usize, texture: f64) -> SceneSpec {
    let mut spec = SceneSpec::flat(seed, size, size, 10.0);
    spec.ground_intensity = 40.0;
    spec.intensity_noise = texture;
    let blocks = [(8, 10, 20, 16), (40, 12, 14, 24), (15, 50, 30, 12), (60, 55, 20, 25), (70, 8, 12, 12)];
    for (i, (c, r, w, h)) in blocks.into_iter().enumerate() {
        if c + w <= size && r + h <= size {
            spec.buildings.push(Building {
                col: c,
                row: r,
                n_cols: w,
                n_rows: h,
                height: 10.0 + 6.0 * i as f64,
                intensity: 200.0 + 10.0 * i as f64,
            });
        }
    }
    spec
}

pub fn scene(seed: u64, size: usize) -> (RasterGrid, RasterGrid) {
    gen_scene(&city_spec(seed, size, 10.0)).unwrap()
}

pub fn noisy(truth: &RasterGrid, sigma: f64, seed: u64) -> RasterGrid {
    degrade(truth, &DegradeSpec { gaussian_sigma: sigma, ..DegradeSpec::clean(seed) }).unwrap()
}

pub fn view(off_nadir: f64, azimuth: f64) -> RpcModel {
    oblique_rpc(geographic_normalization(), off_nadir, azimuth, GroundScale::default()).unwrap()
}

/// Pair manifest with a nadir base image paired against views at the given
/// off-nadir angles; each pair's DSM is the truth with noise rising along the list.
pub fn pair_fixture(dir: &Path, truth: &RasterGrid, angles: &[f64]) -> PathBuf {
    let base = write_rpc(dir, "base.rpc", &view(0.0, 0.0));
    let mut csv = String::from("id_a,id_b,rpc_a_path,rpc_b_path,dsm_path\n");
    for (i, &a) in angles.iter().enumerate() {
        let rpc = write_rpc(dir, &format!("v{i:02}.rpc"), &view(a, 30.0 * i as f64));
        let dsm = write_grid(dir, &format!("pair{i:02}.asc"), &noisy(truth, 0.2 + 0.15 * i as f64, 50 + i as u64));
        csv.push_str(&format!(
            "base,v{i:02},{},{},{}\n",
            base.file_name().unwrap().to_str().unwrap(),
            rpc.file_name().unwrap().to_str().unwrap(),
            dsm.file_name().unwrap().to_str().unwrap()
        ));
    }
    let p = dir.join("pairs.csv");
    std::fs::write(&p, csv).unwrap();
    p
}
