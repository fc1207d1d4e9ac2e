//! Multi-view digital surface model fusion.
//!
//! The crate is organised around one carrier type, [`raster::RasterGrid`],
//! and a handful of processing stages that consume it:
//!
//! - [`rpc`]: rational polynomial sensor model, iterative inversion, object-space
//!   bias compensation and stereo intersection angles.
//! - [`register`]: translation-only DSM co-registration with blunder rejection and
//!   the RMSE evaluation protocol.
//! - [`pairsel`]: stereo pair gating by intersection angle and ranking against a
//!   ground-truth patch.
//! - [`fusion`]: per-cell median fusion and the adaptive, intensity-gated window
//!   median fusion of a stack of depth grids.
//! - [`synth`]: deterministic synthetic scenes and degraded depth layers.

pub mod fusion;
pub mod pairsel;
pub mod raster;
pub mod register;
pub mod rpc;
pub mod synth;

mod stats;

pub use fusion::{DepthStack, FusionConfig, FusionError};
pub use raster::{CellIndex, GridGeometry, RasterError, RasterGrid, Resampling};
pub use register::{AlignConfig, AlignmentResult, RegisterError};
pub use rpc::{GroundPoint, ImagePoint, RpcError, RpcModel};
