use super::parse_tuple;
use crate::args::RpcOp;
use crate::error::CliError;
use dsmfuse_core::rpc::{intersection_angle, read_rpc, GroundPoint, GroundScale, ImagePoint, ObjectShift, RpcModel};
use log::warn;
use std::path::Path;

fn model(path: &Path, bias: Option<&str>) -> Result<RpcModel, CliError> {
    let m = read_rpc(path)?;
    Ok(match bias {
        Some(s) => {
            let [du, dv, dz] = parse_tuple::<3>(s, "bias")?;
            m.apply_bias(ObjectShift::new(du, dv, dz))
        }
        None => m,
    })
}

/// Prints one whitespace-separated line per call; numbers use the shortest
/// representation that reads back exactly.
pub fn rpc(op: &RpcOp) -> Result<(), CliError> {
    match op {
        RpcOp::Project(a) => {
            let m = model(&a.rpc, a.bias.as_deref())?;
            let [u, v, z] = parse_tuple::<3>(&a.point, "point")?;
            let (ip, inside) = m.project_flagged(GroundPoint::new(u, v, z))?;
            if !inside {
                warn!("point lies outside the model's normalized domain");
            }
            println!("{} {}", ip.s, ip.l);
        }
        RpcOp::Invert(a) => {
            let m = model(&a.rpc, a.bias.as_deref())?;
            let [s, l] = parse_tuple::<2>(&a.pixel, "pixel")?;
            let g = m.invert(ImagePoint::new(s, l), a.height)?;
            println!("{} {} {}", g.u, g.v, g.z);
        }
        RpcOp::Angle(a) => {
            let ma = read_rpc(&a.rpc_a)?;
            let mb = read_rpc(&a.rpc_b)?;
            let [u, v, z] = parse_tuple::<3>(&a.at, "at")?;
            if !(a.meters_per_unit > 0.0) {
                return Err(CliError::Config("--meters-per-unit must be positive".into()));
            }
            let angle = intersection_angle(
                &ma,
                &mb,
                GroundPoint::new(u, v, z),
                a.dz_probe,
                GroundScale::uniform(a.meters_per_unit),
            )?;
            println!("{angle}");
        }
    }
    Ok(())
}
