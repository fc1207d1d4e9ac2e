use crate::args::SynthArgs;
use crate::error::CliError;
use crate::output::{ManifestBuilder, Staged};
use dsmfuse_core::raster::to_asc_string;
use dsmfuse_core::synth::{gen_scene, quality_ladder, read_scene_spec, DegradeSpec};

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let spec = read_scene_spec(&a.scene)?;
    let base = DegradeSpec {
        seed: a.degrade_seed,
        gaussian_sigma: a.sigma_first,
        spike_prob: a.spike_prob,
        spike_amp: a.spike_amp,
        hole_prob: a.hole_prob,
    };
    base.validate()?;
    if !(a.sigma_last >= 0.0) {
        return Err(CliError::Config("--sigma-last must be >= 0".into()));
    }
    let (truth, ortho) = gen_scene(&spec)?;
    let layers = quality_ladder(&truth, a.layers, a.sigma_first, a.sigma_last, &base)?;

    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", a.out_dir.display())))?;
    let mut staged = Staged::new();
    let mut manifest = ManifestBuilder::new("synth");
    manifest
        .input(&a.scene)
        .seed(spec.seed)
        .set("layers", a.layers)
        .set("sigma_first", a.sigma_first)
        .set("sigma_last", a.sigma_last)
        .set("spike_prob", a.spike_prob)
        .set("spike_amp", a.spike_amp)
        .set("hole_prob", a.hole_prob)
        .set("degrade_seed", a.degrade_seed);
    let mut put = |name: String, text: String| -> Result<(), CliError> {
        let path = a.out_dir.join(name);
        staged.add(&path, text.as_bytes())?;
        manifest.output(&path);
        Ok(())
    };
    put("truth.asc".into(), to_asc_string(&truth))?;
    put("ortho.asc".into(), to_asc_string(&ortho))?;
    for (i, layer) in layers.iter().enumerate() {
        put(format!("layer_{:02}.asc", i + 1), to_asc_string(layer))?;
    }
    manifest.stage(&mut staged, &a.out_dir.join("synth.manifest.json"))?;
    staged.commit()
}
