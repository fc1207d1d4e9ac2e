use super::{align_config, load, meters};
use crate::args::EvalArgs;
use crate::error::CliError;
use crate::output::{manifest_path, ManifestBuilder, Staged};
use dsmfuse_core::raster::{resample, Resampling};
use dsmfuse_core::register::{align, rmse};

pub const HEADER: &str =
    "rmse_inliers_m,rmse_all_m,rmse_raw_m,dx_m,dy_m,dz_m,n_inliers,n_total,converged";

pub fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let cfg = align_config(&a.align)?;
    let dsm = load(&a.dsm)?;
    let truth = load(&a.truth)?;
    let res = align(&dsm, &truth, &cfg)?;
    // before alignment, blunders included
    let on_truth = resample(&dsm, truth.geometry(), Resampling::Bilinear);
    let (raw, _) = rmse(&on_truth, &truth, true, cfg.blunder_threshold)?;

    let csv = format!(
        "{HEADER}\n{},{},{},{},{},{},{},{},{}\n",
        meters(res.rmse_inliers),
        meters(res.rmse_all),
        meters(raw),
        meters(res.dx),
        meters(res.dy),
        meters(res.dz),
        res.n_inliers,
        res.n_total,
        res.converged
    );
    let Some(out) = &a.out else {
        print!("{csv}");
        return Ok(());
    };
    let mut manifest = ManifestBuilder::new("eval");
    manifest
        .input(&a.dsm)
        .input(&a.truth)
        .output(out)
        .set("threshold", cfg.blunder_threshold)
        .set("max_search", cfg.max_search)
        .set("max_iterations", cfg.max_iterations)
        .set("convergence_tol", cfg.convergence_tol);
    let mut staged = Staged::new();
    staged.add(out, csv.as_bytes())?;
    manifest.stage(&mut staged, &manifest_path(out))?;
    staged.commit()
}
