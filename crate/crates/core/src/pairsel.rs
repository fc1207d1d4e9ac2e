//! Stereo pair gating by intersection angle and ranking against a truth patch.

use crate::raster::RasterGrid;
use crate::register::{align, AlignConfig};
use crate::rpc::{intersection_angle, GroundPoint, GroundScale, RpcError, RpcModel};
use log::warn;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::path::PathBuf;
use thiserror::Error;

/// Height probe used to trace viewing rays, meters.
pub const DEFAULT_DZ_PROBE: f64 = 100.0;

#[derive(Debug, Error)]
pub enum PairError {
    #[error("need at least two images, got {0}")]
    TooFewImages(usize),
    #[error("invalid pair gate: {0}")]
    InvalidGate(String),
    #[error("pair uses the same image twice: {0}")]
    SameImage(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGate {
    pub min_angle: f64,
    pub max_angle: f64,
    pub top_k: usize,
}

impl Default for PairGate {
    fn default() -> Self {
        Self {
            min_angle: 10.0,
            max_angle: 30.0,
            top_k: 10,
        }
    }
}

impl PairGate {
    pub fn validate(&self) -> Result<(), PairError> {
        if !(self.min_angle >= 0.0 && self.min_angle < self.max_angle) {
            return Err(PairError::InvalidGate(format!(
                "need 0 <= min_angle < max_angle, got [{}, {}]",
                self.min_angle, self.max_angle
            )));
        }
        Ok(())
    }

    /// Inclusive on both bounds.
    pub fn admits(&self, angle: f64) -> bool {
        angle >= self.min_angle && angle <= self.max_angle
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub id_a: String,
    pub id_b: String,
    pub angle: f64,
    pub rank_rmse: Option<f64>,
    pub dsm_path: Option<PathBuf>,
    pub selected: bool,
    /// Why the pair could not be scored, if it could not.
    pub failure: Option<String>,
}

impl PairRecord {
    /// Record with ids ordered so that `id_a < id_b`.
    pub fn new(id_a: &str, id_b: &str, angle: f64) -> Result<Self, PairError> {
        if id_a == id_b {
            return Err(PairError::SameImage(id_a.to_string()));
        }
        let (a, b) = if id_a < id_b { (id_a, id_b) } else { (id_b, id_a) };
        Ok(Self {
            id_a: a.to_string(),
            id_b: b.to_string(),
            angle,
            rank_rmse: None,
            dsm_path: None,
            selected: false,
            failure: None,
        })
    }
}

fn by_ids(a: &PairRecord, b: &PairRecord) -> Ordering {
    (&a.id_a, &a.id_b).cmp(&(&b.id_a, &b.id_b))
}

/// Every unordered pair of `models` whose intersection angle at `at` lies inside the
/// gate, sorted by ascending angle. Pairs whose angle cannot be computed are dropped
/// with a warning.
pub fn gate_pairs(
    models: &[(String, RpcModel)],
    at: GroundPoint,
    gate: &PairGate,
    scale: GroundScale,
) -> Result<Vec<PairRecord>, PairError> {
    gate.validate()?;
    if models.len() < 2 {
        return Err(PairError::TooFewImages(models.len()));
    }
    let mut sorted: Vec<&(String, RpcModel)> = models.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let (ia, ma) = sorted[i];
            let (ib, mb) = sorted[j];
            let angle = match pair_angle(ma, mb, at, scale) {
                Ok(a) => a,
                Err(e) => {
                    warn!("dropping pair {ia}/{ib}: {e}");
                    continue;
                }
            };
            if gate.admits(angle) {
                out.push(PairRecord::new(ia, ib, angle)?);
            }
        }
    }
    out.sort_by(|a, b| a.angle.total_cmp(&b.angle).then_with(|| by_ids(a, b)));
    Ok(out)
}

/// Intersection angle with the default height probe.
pub fn pair_angle(
    a: &RpcModel,
    b: &RpcModel,
    at: GroundPoint,
    scale: GroundScale,
) -> Result<f64, RpcError> {
    intersection_angle(a, b, at, DEFAULT_DZ_PROBE, scale)
}

/// Aligns each candidate's DSM patch to `truth`, scores it by inlier RMSE and sorts
/// ascending; the first `top_k` scorable pairs are selected. Candidates that cannot be
/// aligned are kept, flagged, and ranked last. Ties fall back to the pair ids.
pub fn rank_pairs(
    candidates: Vec<(PairRecord, RasterGrid)>,
    truth: &RasterGrid,
    cfg: &AlignConfig,
    gate: &PairGate,
) -> Vec<PairRecord> {
    let mut ranked: Vec<PairRecord> = candidates
        .into_par_iter()
        .map(|(mut rec, dsm)| {
            match align(&dsm, truth, cfg) {
                Ok(res) => rec.rank_rmse = Some(res.rmse_inliers),
                Err(e) => {
                    warn!("pair {}/{} cannot be ranked: {e}", rec.id_a, rec.id_b);
                    rec.rank_rmse = None;
                    rec.failure = Some(e.to_string());
                }
            }
            rec.selected = false;
            rec
        })
        .collect();
    ranked.sort_by(|a, b| match (a.rank_rmse, b.rank_rmse) {
        (Some(x), Some(y)) => x.total_cmp(&y).then_with(|| by_ids(a, b)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => by_ids(a, b),
    });
    for rec in ranked
        .iter_mut()
        .filter(|r| r.rank_rmse.is_some())
        .take(gate.top_k)
    {
        rec.selected = true;
    }
    ranked
}
