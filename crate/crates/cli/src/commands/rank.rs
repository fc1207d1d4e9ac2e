use super::{align_config, load, meters, parse_tuple};
use crate::args::RankArgs;
use crate::error::CliError;
use crate::output::{manifest_path, ManifestBuilder, Staged};
use dsmfuse_core::pairsel::{pair_angle, rank_pairs, PairGate, PairRecord};
use dsmfuse_core::raster::RasterGrid;
use dsmfuse_core::rpc::{read_rpc, GroundPoint, GroundScale, RpcModel};
use log::{info, warn};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
struct ManifestRow {
    id_a: String,
    id_b: String,
    rpc_a_path: PathBuf,
    rpc_b_path: PathBuf,
    dsm_path: PathBuf,
}

fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(io)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut rows = Vec::new();
    for row in reader.deserialize::<ManifestRow>() {
        let mut row = row.map_err(io)?;
        for p in [&mut row.rpc_a_path, &mut row.rpc_b_path, &mut row.dsm_path] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn rank(a: &RankArgs) -> Result<(), CliError> {
    let acfg = align_config(&a.align)?;
    let gate = PairGate {
        min_angle: a.min_angle,
        max_angle: a.max_angle,
        top_k: a.top_k,
    };
    gate.validate()?;
    if !(a.meters_per_unit > 0.0 && a.meters_per_unit.is_finite()) {
        return Err(CliError::Config("--meters-per-unit must be positive".into()));
    }
    let scale = GroundScale::uniform(a.meters_per_unit);
    let at = a.at.as_deref().map(|s| parse_tuple::<3>(s, "at")).transpose()?;

    let rows = read_manifest(&a.manifest)?;
    let truth = load(&a.truth)?;
    let mut models: BTreeMap<PathBuf, RpcModel> = BTreeMap::new();
    for row in &rows {
        for p in [&row.rpc_a_path, &row.rpc_b_path] {
            if !models.contains_key(p) {
                models.insert(p.clone(), read_rpc(p)?);
            }
        }
    }
    let at = match (at, rows.first()) {
        (Some([u, v, z]), _) => GroundPoint::new(u, v, z),
        (None, Some(first)) => {
            let n = &models[&first.rpc_a_path].norm;
            GroundPoint::new(n.u_off, n.v_off, n.z_off)
        }
        (None, None) => GroundPoint::new(0.0, 0.0, 0.0),
    };

    let mut candidates: Vec<(PairRecord, RasterGrid)> = Vec::new();
    for row in &rows {
        let angle = match pair_angle(&models[&row.rpc_a_path], &models[&row.rpc_b_path], at, scale) {
            Ok(angle) => angle,
            Err(e) => {
                warn!("dropping pair {}/{}: {e}", row.id_a, row.id_b);
                continue;
            }
        };
        if !gate.admits(angle) {
            info!("pair {}/{} at {angle:.3} deg is outside the gate", row.id_a, row.id_b);
            continue;
        }
        let mut rec = PairRecord::new(&row.id_a, &row.id_b, angle)?;
        rec.dsm_path = Some(row.dsm_path.clone());
        candidates.push((rec, load(&row.dsm_path)?));
    }
    if candidates.is_empty() {
        warn!(
            "no pair inside [{}, {}] degrees; the selection is empty",
            gate.min_angle, gate.max_angle
        );
    }
    let ranked = rank_pairs(candidates, &truth, &acfg, &gate);

    let mut csv = String::from("id_a,id_b,angle_deg,rank_rmse_m,selected\n");
    for r in &ranked {
        csv.push_str(&format!(
            "{},{},{:.6},{},{}\n",
            r.id_a,
            r.id_b,
            r.angle,
            r.rank_rmse.map(meters).unwrap_or_default(),
            r.selected
        ));
    }

    let mut manifest = ManifestBuilder::new("rank");
    manifest.input(&a.manifest).input(&a.truth);
    for row in &rows {
        manifest.input(&row.dsm_path);
    }
    for p in models.keys() {
        manifest.input(p);
    }
    manifest
        .output(&a.out)
        .set("min_angle", gate.min_angle)
        .set("max_angle", gate.max_angle)
        .set("top_k", gate.top_k)
        .set("at", format!("{},{},{}", at.u, at.v, at.z))
        .set("meters_per_unit", a.meters_per_unit)
        .set("threshold", acfg.blunder_threshold)
        .set("max_search", acfg.max_search);
    let mut staged = Staged::new();
    staged.add(&a.out, csv.as_bytes())?;
    manifest.stage(&mut staged, &manifest_path(&a.out))?;
    staged.commit()
}
