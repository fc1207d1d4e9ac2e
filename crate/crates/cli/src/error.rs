use dsmfuse_core::fusion::FusionError;
use dsmfuse_core::pairsel::PairError;
use dsmfuse_core::raster::RasterError;
use dsmfuse_core::register::RegisterError;
use dsmfuse_core::rpc::RpcError;
use dsmfuse_core::synth::SynthError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROCESSING: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_GEOMETRY: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, unwritable or malformed files.
    #[error("{0}")]
    Io(String),
    /// Inputs that cannot be brought onto a common grid.
    #[error("{0}")]
    Geometry(String),
    /// Bad flags, config files or parameter values.
    #[error("{0}")]
    Config(String),
    /// Valid inputs on which the computation itself failed.
    #[error("{0}")]
    Processing(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Geometry(_) => EXIT_GEOMETRY,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Processing(_) => EXIT_PROCESSING,
        }
    }
}

impl From<RasterError> for CliError {
    fn from(e: RasterError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<RpcError> for CliError {
    fn from(e: RpcError) -> Self {
        match e {
            RpcError::Io { .. }
            | RpcError::MissingKey(_)
            | RpcError::BadValue { .. }
            | RpcError::InvalidModel(_) => CliError::Io(e.to_string()),
            RpcError::InvalidArgument(_) => CliError::Config(e.to_string()),
            RpcError::DegenerateDenominator(_) | RpcError::InversionFailed { .. } => {
                CliError::Processing(e.to_string())
            }
        }
    }
}

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        match e {
            FusionError::GeometryMismatch(_) | FusionError::OrthoMismatch => {
                CliError::Geometry(e.to_string())
            }
            FusionError::EmptyStack | FusionError::InvalidConfig(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<RegisterError> for CliError {
    fn from(e: RegisterError) -> Self {
        match e {
            RegisterError::InvalidConfig(_) => CliError::Config(e.to_string()),
            RegisterError::InsufficientOverlap { .. } | RegisterError::GeometryMismatch => {
                CliError::Geometry(e.to_string())
            }
            RegisterError::NoValidCells => CliError::Processing(e.to_string()),
        }
    }
}

impl From<PairError> for CliError {
    fn from(e: PairError) -> Self {
        match e {
            PairError::InvalidGate(_) | PairError::TooFewImages(_) => CliError::Config(e.to_string()),
            PairError::SameImage(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidSpec(_) => CliError::Config(e.to_string()),
            SynthError::Parse { .. } | SynthError::Io { .. } | SynthError::Raster(_) => {
                CliError::Io(e.to_string())
            }
        }
    }
}
