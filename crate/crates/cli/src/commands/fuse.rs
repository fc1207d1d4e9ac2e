use super::{fusion_config, load_ortho, load_stack};
use crate::args::{FuseArgs, Mode};
use crate::error::CliError;
use crate::output::{manifest_path, sibling, ManifestBuilder, Staged};
use dsmfuse_core::fusion::{adaptive_median_fuse, median_fuse, DepthStack};
use dsmfuse_core::raster::{to_asc_string, to_pgm};
use log::info;

pub fn fuse(a: &FuseArgs) -> Result<(), CliError> {
    let cfg = fusion_config(&a.fusion)?;
    if a.mode == Mode::Adaptive && a.ortho.is_none() {
        return Err(CliError::Config("--ortho is required with --mode adaptive".into()));
    }
    let (layers, target) = load_stack(&a.layers, a.grid.as_deref())?;
    let stack = DepthStack::new(layers)?;

    let mut manifest = ManifestBuilder::new("fuse");
    for p in &a.layers {
        manifest.input(p);
    }
    let fused = match a.mode {
        Mode::Median => median_fuse(&stack),
        Mode::Adaptive => {
            let path = a.ortho.as_ref().expect("checked above");
            manifest.input(path);
            let ortho = load_ortho(path, &target)?;
            adaptive_median_fuse(&stack, &ortho, &cfg)?
        }
    };
    info!(
        "fused {} layers, {} of {} cells valid",
        stack.len(),
        fused.valid_count(),
        target.len()
    );

    let pgm = sibling(&a.out, "pgm");
    let json = manifest_path(&a.out);
    manifest
        .output(&a.out)
        .output(&pgm)
        .set("mode", format!("{:?}", a.mode).to_lowercase())
        .set("delta_s", cfg.delta_s)
        .set("delta_i", cfg.delta_i)
        .set("gamma", cfg.gamma)
        .set("radius", cfg.radius)
        .set(
            "grid",
            format!(
                "{},{},{},{},{}",
                target.origin_x, target.origin_y, target.cell_size, target.n_cols, target.n_rows
            ),
        );
    let mut staged = Staged::new();
    staged.add(&a.out, to_asc_string(&fused).as_bytes())?;
    staged.add(&pgm, to_pgm(&fused).as_bytes())?;
    manifest.stage(&mut staged, &json)?;
    staged.commit()
}
