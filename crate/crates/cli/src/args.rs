use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "dsmfuse", version, about = "Depth-map fusion, stereo pair ranking and DSM evaluation")]
pub struct Cli {
    /// Worker threads; defaults to one per core
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,

    /// File of key=value lines supplying defaults for any flag of the subcommand
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse a stack of depth layers into one DSM
    Fuse(FuseArgs),
    /// Gate stereo pairs by intersection angle and rank their DSMs against a truth patch
    Rank(RankArgs),
    /// Align a DSM to a reference and report RMSE
    Eval(EvalArgs),
    /// RMSE against truth for the top-k layers, k = 1..N, with both fusion methods
    Curve(CurveArgs),
    /// RPC projection, inversion and intersection angles
    Rpc {
        #[command(subcommand)]
        op: RpcOp,
    },
    /// Generate a synthetic scene and a ladder of degraded layers
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Median,
    Adaptive,
}

#[derive(Debug, Clone, Args)]
pub struct FusionFlags {
    /// Spatial bandwidth of the window weight, cells
    #[arg(long, default_value_t = 2.5)]
    pub delta_s: f64,
    /// Intensity bandwidth of the window weight, gray levels
    #[arg(long, default_value_t = 15.0)]
    pub delta_i: f64,
    /// Weight threshold for window membership
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Half-size of the search square, cells
    #[arg(long, default_value_t = 3)]
    pub radius: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AlignFlags {
    /// Height differences beyond this are blunders during alignment, meters
    #[arg(long, default_value_t = 6.0)]
    pub threshold: f64,
    /// Coarse search half-width, cells
    #[arg(long, default_value_t = 10)]
    pub max_search: usize,
    #[arg(long, default_value_t = 50)]
    pub max_iterations: usize,
    /// Sub-cell convergence tolerance, cells
    #[arg(long, default_value_t = 1e-4)]
    pub convergence_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FuseArgs {
    /// Depth layers (ASCII grids), comma separated or repeated
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    pub layers: Vec<PathBuf>,
    /// Orthophoto supplying intensities; required for adaptive mode
    #[arg(long)]
    pub ortho: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Adaptive)]
    pub mode: Mode,
    #[command(flatten)]
    pub fusion: FusionFlags,
    /// Output grid as x0,y0,cell,ncols,nrows; defaults to the first layer's grid
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Fused DSM path; a .pgm preview and .manifest.json are written beside it
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    /// CSV with columns id_a,id_b,rpc_a_path,rpc_b_path,dsm_path
    #[arg(long)]
    pub manifest: PathBuf,
    /// Ground-truth DSM patch
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    pub min_angle: f64,
    #[arg(long, default_value_t = 30.0)]
    pub max_angle: f64,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Ground point u,v,z for the angle; defaults to the first model's offsets
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<String>,
    /// Meters per ground unit (111320 for degrees, 1 for projected models)
    #[arg(long, default_value_t = dsmfuse_core::rpc::METERS_PER_DEGREE)]
    pub meters_per_unit: f64,
    #[command(flatten)]
    pub align: AlignFlags,
    /// Ranked CSV output
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// DSM to evaluate
    #[arg(long)]
    pub dsm: PathBuf,
    /// Reference DSM
    #[arg(long)]
    pub truth: PathBuf,
    #[command(flatten)]
    pub align: AlignFlags,
    /// CSV output; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    /// Depth layers in rank order, comma separated or repeated
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    pub layers: Vec<PathBuf>,
    #[arg(long)]
    pub ortho: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[command(flatten)]
    pub fusion: FusionFlags,
    #[command(flatten)]
    pub align: AlignFlags,
    /// Output grid as x0,y0,cell,ncols,nrows; defaults to the first layer's grid
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// CSV output with columns k,rmse_adaptive_m,rmse_median_m
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum RpcOp {
    /// Ground u,v,z to image sample,line
    Project(ProjectArgs),
    /// Image sample,line at height z to ground u,v
    Invert(InvertArgs),
    /// Intersection angle of two models at a ground point, degrees
    Angle(AngleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub rpc: PathBuf,
    /// u,v,z
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Object-space bias du,dv,dz added before projection
    #[arg(long, allow_hyphen_values = true)]
    pub bias: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct InvertArgs {
    #[arg(long)]
    pub rpc: PathBuf,
    /// sample,line
    #[arg(long, allow_hyphen_values = true)]
    pub pixel: String,
    #[arg(long, allow_hyphen_values = true)]
    pub height: f64,
    /// Object-space bias du,dv,dz
    #[arg(long, allow_hyphen_values = true)]
    pub bias: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct AngleArgs {
    #[arg(long)]
    pub rpc_a: PathBuf,
    #[arg(long)]
    pub rpc_b: PathBuf,
    /// u,v,z
    #[arg(long, allow_hyphen_values = true)]
    pub at: String,
    #[arg(long, default_value_t = dsmfuse_core::pairsel::DEFAULT_DZ_PROBE)]
    pub dz_probe: f64,
    #[arg(long, default_value_t = dsmfuse_core::rpc::METERS_PER_DEGREE)]
    pub meters_per_unit: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Scene spec file of key=value lines
    #[arg(long)]
    pub scene: PathBuf,
    /// Directory receiving truth.asc, ortho.asc and layer_NN.asc
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Number of degraded layers
    #[arg(long, default_value_t = 0)]
    pub layers: usize,
    #[arg(long, default_value_t = 0.2)]
    pub sigma_first: f64,
    #[arg(long, default_value_t = 3.0)]
    pub sigma_last: f64,
    #[arg(long, default_value_t = 0.0)]
    pub spike_prob: f64,
    #[arg(long, default_value_t = 10.0)]
    pub spike_amp: f64,
    #[arg(long, default_value_t = 0.0)]
    pub hole_prob: f64,
    /// Seed of the first layer; layer i uses seed + i
    #[arg(long, default_value_t = 0)]
    pub degrade_seed: u64,
}
