//! `KEY: value` text form of an RPC model.
//!
//! Keys may appear in any order; unknown keys (error estimates and the like) are
//! ignored. Only the first whitespace-separated token after the colon is read, so
//! trailing unit annotations such as `pixels` or `degrees` are accepted.

use super::{Normalization, RpcError, RpcModel, N_TERMS};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

const NORM_KEYS: [&str; 10] = [
    "SAMP_OFF",
    "SAMP_SCALE",
    "LINE_OFF",
    "LINE_SCALE",
    "U_OFF",
    "U_SCALE",
    "V_OFF",
    "V_SCALE",
    "Z_OFF",
    "Z_SCALE",
];

const COEFF_PREFIXES: [&str; 4] = [
    "SAMP_NUM_COEFF",
    "SAMP_DEN_COEFF",
    "LINE_NUM_COEFF",
    "LINE_DEN_COEFF",
];

pub fn read_rpc(path: impl AsRef<Path>) -> Result<RpcModel, RpcError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| RpcError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_rpc(&text)
}

pub fn parse_rpc(text: &str) -> Result<RpcModel, RpcError> {
    let mut entries: HashMap<String, &str> = HashMap::new();
    for line in text.lines() {
        let Some((key, rest)) = line.split_once(':') else {
            continue;
        };
        let key = key.trim().to_ascii_uppercase();
        let value = rest.split_whitespace().next().unwrap_or("");
        entries.insert(key, value);
    }

    let get = |key: &str| -> Result<f64, RpcError> {
        let raw = entries
            .get(key)
            .ok_or_else(|| RpcError::MissingKey(key.to_string()))?;
        raw.parse::<f64>().map_err(|_| RpcError::BadValue {
            key: key.to_string(),
            value: raw.to_string(),
        })
    };

    let mut n = [0.0; 10];
    for (slot, key) in n.iter_mut().zip(NORM_KEYS) {
        *slot = get(key)?;
    }
    let mut coeffs = [[0.0; N_TERMS]; 4];
    for (block, prefix) in coeffs.iter_mut().zip(COEFF_PREFIXES) {
        for (i, c) in block.iter_mut().enumerate() {
            *c = get(&format!("{prefix}_{}", i + 1))?;
        }
    }
    let norm = Normalization {
        samp_off: n[0],
        samp_scale: n[1],
        line_off: n[2],
        line_scale: n[3],
        u_off: n[4],
        u_scale: n[5],
        v_off: n[6],
        v_scale: n[7],
        z_off: n[8],
        z_scale: n[9],
    };
    let [num_s, den_s, num_l, den_l] = coeffs;
    RpcModel::new(num_s, den_s, num_l, den_l, norm)
}

/// Writes the model's polynomials; any object-space shift it carries is not part of
/// the file format and is dropped.
pub fn to_rpc_string(model: &RpcModel) -> String {
    let n = &model.norm;
    let values = [
        n.samp_off,
        n.samp_scale,
        n.line_off,
        n.line_scale,
        n.u_off,
        n.u_scale,
        n.v_off,
        n.v_scale,
        n.z_off,
        n.z_scale,
    ];
    let mut out = String::new();
    for (key, v) in NORM_KEYS.iter().zip(values) {
        let _ = writeln!(out, "{key}: {v:e}");
    }
    let blocks = [&model.num_s, &model.den_s, &model.num_l, &model.den_l];
    for (prefix, block) in COEFF_PREFIXES.iter().zip(blocks) {
        for (i, c) in block.iter().enumerate() {
            let _ = writeln!(out, "{prefix}_{}: {c:e}", i + 1);
        }
    }
    out
}
