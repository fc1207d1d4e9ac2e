use super::{align_config, fusion_config, load, load_ortho, load_stack, meters};
use crate::args::CurveArgs;
use crate::error::CliError;
use crate::output::{manifest_path, ManifestBuilder, Staged};
use dsmfuse_core::fusion::{adaptive_median_fuse, median_fuse, DepthStack};
use dsmfuse_core::register::align;
use log::info;

pub fn curve(a: &CurveArgs) -> Result<(), CliError> {
    let fcfg = fusion_config(&a.fusion)?;
    let acfg = align_config(&a.align)?;
    let (layers, target) = load_stack(&a.layers, a.grid.as_deref())?;
    let ortho = load_ortho(&a.ortho, &target)?;
    let truth = load(&a.truth)?;

    let mut csv = String::from("k,rmse_adaptive_m,rmse_median_m\n");
    for k in 1..=layers.len() {
        let stack = DepthStack::new(layers[..k].to_vec())?;
        let adaptive = adaptive_median_fuse(&stack, &ortho, &fcfg)?;
        let median = median_fuse(&stack);
        let ra = align(&adaptive, &truth, &acfg)?;
        let rm = align(&median, &truth, &acfg)?;
        info!("k={k}: adaptive {:.4} m, median {:.4} m", ra.rmse_all, rm.rmse_all);
        csv.push_str(&format!("{k},{},{}\n", meters(ra.rmse_all), meters(rm.rmse_all)));
    }

    let mut manifest = ManifestBuilder::new("curve");
    for p in &a.layers {
        manifest.input(p);
    }
    manifest
        .input(&a.ortho)
        .input(&a.truth)
        .output(&a.out)
        .set("delta_s", fcfg.delta_s)
        .set("delta_i", fcfg.delta_i)
        .set("gamma", fcfg.gamma)
        .set("radius", fcfg.radius)
        .set("threshold", acfg.blunder_threshold)
        .set("max_search", acfg.max_search);
    let mut staged = Staged::new();
    staged.add(&a.out, csv.as_bytes())?;
    manifest.stage(&mut staged, &manifest_path(&a.out))?;
    staged.commit()
}
