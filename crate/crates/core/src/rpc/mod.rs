//! Rational polynomial (RPC) sensor model.
//!
//! Image coordinates are ratios of cubic polynomials in normalized ground
//! coordinates. The 20 monomials are ordered
//!
//! ```text
//! 1, U, V, Z, UV, UZ, VZ, U², V², Z², UVZ, U³, UV², UZ², U²V, V³, VZ², U²Z, V²Z, Z³
//! ```
//!
//! which is the usual satellite RPC layout (U = longitude/easting, V = latitude/northing),
//! so coefficient files load without permutation.
//!
//! A model may carry a constant object-space shift (0th order bias compensation):
//! projecting `p` through a shifted model evaluates the polynomials at `p + shift`.

mod file;

pub use file::{parse_rpc, read_rpc, to_rpc_string};

use thiserror::Error;

pub const N_TERMS: usize = 20;

/// Denominators smaller than this in magnitude are treated as degenerate.
const MIN_DENOMINATOR: f64 = 1e-12;
/// Normalized coordinates beyond this are outside the model's fitted domain.
const VALIDITY_BOUND: f64 = 1.5;

const NEWTON_MAX_ITERATIONS: usize = 50;
const NEWTON_TOLERANCE: f64 = 1e-9;
const JACOBIAN_STEP: f64 = 1e-6;

/// Default degree-to-meter factor used for ray geometry on geographic models.
pub const METERS_PER_DEGREE: f64 = 111_320.0;

#[derive(Debug, Error)]
pub enum RpcError {
    #[error("invalid RPC model: {0}")]
    InvalidModel(String),
    #[error("degenerate model: denominator {0:e} at evaluation point")]
    DegenerateDenominator(f64),
    #[error("inversion did not converge after {iterations} iterations (residual {residual:e} px)")]
    InversionFailed { iterations: usize, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("missing RPC key {0}")]
    MissingKey(String),
    #[error("bad value {value:?} for RPC key {key}")]
    BadValue { key: String, value: String },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Ground coordinates: `u` easting/longitude, `v` northing/latitude, `z` height in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPoint {
    pub u: f64,
    pub v: f64,
    pub z: f64,
}

impl GroundPoint {
    pub fn new(u: f64, v: f64, z: f64) -> Self {
        Self { u, v, z }
    }
}

/// Image coordinates in pixels: `s` sample (column), `l` line (row).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub s: f64,
    pub l: f64,
}

impl ImagePoint {
    pub fn new(s: f64, l: f64) -> Self {
        Self { s, l }
    }
}

/// Constant object-space shift (ΔU, ΔV, ΔZ) in ground units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObjectShift {
    pub du: f64,
    pub dv: f64,
    pub dz: f64,
}

impl ObjectShift {
    pub fn new(du: f64, dv: f64, dz: f64) -> Self {
        Self { du, dv, dz }
    }
}

/// An object-space shift together with the image-space correction it induces at
/// one ground point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasCorrection {
    pub du: f64,
    pub dv: f64,
    pub dz: f64,
    pub ds: f64,
    pub dl: f64,
}

/// Offsets and scales of the five normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub samp_off: f64,
    pub samp_scale: f64,
    pub line_off: f64,
    pub line_scale: f64,
    pub u_off: f64,
    pub u_scale: f64,
    pub v_off: f64,
    pub v_scale: f64,
    pub z_off: f64,
    pub z_scale: f64,
}

impl Normalization {
    /// Zero offsets, unit scales.
    pub fn identity() -> Self {
        Self {
            samp_off: 0.0,
            samp_scale: 1.0,
            line_off: 0.0,
            line_scale: 1.0,
            u_off: 0.0,
            u_scale: 1.0,
            v_off: 0.0,
            v_scale: 1.0,
            z_off: 0.0,
            z_scale: 1.0,
        }
    }
}

/// Degree/unit to meter factors applied to `u` and `v` when measuring ray geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundScale {
    pub meters_per_u: f64,
    pub meters_per_v: f64,
}

impl GroundScale {
    pub fn uniform(meters_per_unit: f64) -> Self {
        Self {
            meters_per_u: meters_per_unit,
            meters_per_v: meters_per_unit,
        }
    }

    /// Ground coordinates already in meters.
    pub fn meters() -> Self {
        Self::uniform(1.0)
    }
}

impl Default for GroundScale {
    fn default() -> Self {
        Self::uniform(METERS_PER_DEGREE)
    }
}

/// The 20 cubic monomials of a normalized point, in RPC order.
#[inline]
pub fn monomials(u: f64, v: f64, z: f64) -> [f64; N_TERMS] {
    [
        1.0,
        u,
        v,
        z,
        u * v,
        u * z,
        v * z,
        u * u,
        v * v,
        z * z,
        u * v * z,
        u * u * u,
        u * v * v,
        u * z * z,
        u * u * v,
        v * v * v,
        v * z * z,
        u * u * z,
        v * v * z,
        z * z * z,
    ]
}

#[inline]
fn dot(coeffs: &[f64; N_TERMS], terms: &[f64; N_TERMS]) -> f64 {
    coeffs.iter().zip(terms).map(|(c, t)| c * t).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpcModel {
    pub num_s: [f64; N_TERMS],
    pub den_s: [f64; N_TERMS],
    pub num_l: [f64; N_TERMS],
    pub den_l: [f64; N_TERMS],
    pub norm: Normalization,
    bias: ObjectShift,
}

impl RpcModel {
    pub fn new(
        num_s: [f64; N_TERMS],
        den_s: [f64; N_TERMS],
        num_l: [f64; N_TERMS],
        den_l: [f64; N_TERMS],
        norm: Normalization,
    ) -> Result<Self, RpcError> {
        let model = Self {
            num_s,
            den_s,
            num_l,
            den_l,
            norm,
            bias: ObjectShift::default(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Model whose sample and line are affine in normalized (U, V, Z): `s_lin` and
    /// `l_lin` are the coefficients of `1, U, V, Z`; denominators are 1.
    pub fn affine(norm: Normalization, s_lin: [f64; 4], l_lin: [f64; 4]) -> Result<Self, RpcError> {
        let mut num_s = [0.0; N_TERMS];
        let mut num_l = [0.0; N_TERMS];
        num_s[..4].copy_from_slice(&s_lin);
        num_l[..4].copy_from_slice(&l_lin);
        let mut den = [0.0; N_TERMS];
        den[0] = 1.0;
        Self::new(num_s, den, num_l, den, norm)
    }

    fn validate(&self) -> Result<(), RpcError> {
        let all = self
            .num_s
            .iter()
            .chain(&self.den_s)
            .chain(&self.num_l)
            .chain(&self.den_l);
        if all.clone().any(|c| !c.is_finite()) {
            return Err(RpcError::InvalidModel("non-finite coefficient".into()));
        }
        if self.den_s[0] == 0.0 || self.den_l[0] == 0.0 {
            return Err(RpcError::InvalidModel(
                "denominator constant terms must be nonzero".into(),
            ));
        }
        let n = &self.norm;
        let scales = [
            ("SAMP_SCALE", n.samp_scale),
            ("LINE_SCALE", n.line_scale),
            ("U_SCALE", n.u_scale),
            ("V_SCALE", n.v_scale),
            ("Z_SCALE", n.z_scale),
        ];
        for (name, s) in scales {
            if s == 0.0 || !s.is_finite() {
                return Err(RpcError::InvalidModel(format!("{name} must be nonzero")));
            }
        }
        let offsets = [n.samp_off, n.line_off, n.u_off, n.v_off, n.z_off];
        if offsets.iter().any(|o| !o.is_finite()) {
            return Err(RpcError::InvalidModel("non-finite offset".into()));
        }
        Ok(())
    }

    pub fn bias(&self) -> ObjectShift {
        self.bias
    }

    /// Returns a copy whose projections evaluate the polynomials at `p + shift`.
    ///
    /// Shifts accumulate when applied to an already shifted model.
    pub fn apply_bias(&self, shift: ObjectShift) -> Self {
        let mut out = self.clone();
        out.bias = ObjectShift {
            du: self.bias.du + shift.du,
            dv: self.bias.dv + shift.dv,
            dz: self.bias.dz + shift.dz,
        };
        out
    }

    /// The model without any object-space shift.
    pub fn unbiased(&self) -> Self {
        let mut out = self.clone();
        out.bias = ObjectShift::default();
        out
    }

    /// Normalized ground coordinates of `p`, shift included.
    #[inline]
    pub fn normalize_ground(&self, p: GroundPoint) -> [f64; 3] {
        let n = &self.norm;
        [
            (p.u + self.bias.du - n.u_off) / n.u_scale,
            (p.v + self.bias.dv - n.v_off) / n.v_scale,
            (p.z + self.bias.dz - n.z_off) / n.z_scale,
        ]
    }

    /// Whether `p` lies within the soft validity domain (|normalized| ≤ 1.5).
    pub fn in_domain(&self, p: GroundPoint) -> bool {
        self.normalize_ground(p)
            .iter()
            .all(|c| c.abs() <= VALIDITY_BOUND)
    }

    /// Normalized (sample, line) at a normalized ground point.
    #[inline]
    fn eval_normalized(&self, nu: f64, nv: f64, nz: f64) -> Result<(f64, f64), RpcError> {
        let t = monomials(nu, nv, nz);
        let ds = dot(&self.den_s, &t);
        let dl = dot(&self.den_l, &t);
        for d in [ds, dl] {
            if !(d.abs() >= MIN_DENOMINATOR) {
                return Err(RpcError::DegenerateDenominator(d));
            }
        }
        Ok((dot(&self.num_s, &t) / ds, dot(&self.num_l, &t) / dl))
    }

    pub fn project(&self, p: GroundPoint) -> Result<ImagePoint, RpcError> {
        let [nu, nv, nz] = self.normalize_ground(p);
        let (ns, nl) = self.eval_normalized(nu, nv, nz)?;
        let n = &self.norm;
        Ok(ImagePoint {
            s: n.samp_scale * ns + n.samp_off,
            l: n.line_scale * nl + n.line_off,
        })
    }

    /// Projection plus a flag that is `true` when `p` lies outside the validity domain.
    pub fn project_flagged(&self, p: GroundPoint) -> Result<(ImagePoint, bool), RpcError> {
        let ip = self.project(p)?;
        Ok((ip, !self.in_domain(p)))
    }

    /// Ground point at height `z` that projects to `ip`.
    ///
    /// Newton iteration on normalized (U, V) with a central-difference Jacobian.
    /// Once the normalized residual drops below 1e-9 one more step is taken, which
    /// brings the image residual to rounding level for realistic pixel scales.
    pub fn invert(&self, ip: ImagePoint, z: f64) -> Result<GroundPoint, RpcError> {
        if !(z.is_finite() && ip.s.is_finite() && ip.l.is_finite()) {
            return Err(RpcError::InvalidArgument("non-finite inversion input".into()));
        }
        let n = self.norm;
        let target_s = (ip.s - n.samp_off) / n.samp_scale;
        let target_l = (ip.l - n.line_off) / n.line_scale;
        let nz = (z + self.bias.dz - n.z_off) / n.z_scale;

        let residual = |nu: f64, nv: f64| -> Result<(f64, f64), RpcError> {
            let (s, l) = self.eval_normalized(nu, nv, nz)?;
            Ok((s - target_s, l - target_l))
        };
        let pixel_residual =
            |r: (f64, f64)| (r.0 * n.samp_scale).abs().max((r.1 * n.line_scale).abs());

        let (mut nu, mut nv) = (0.0f64, 0.0f64);
        let mut r = residual(nu, nv)?;
        let mut polished = false;
        for _ in 0..NEWTON_MAX_ITERATIONS {
            let converged = r.0.abs().max(r.1.abs()) < NEWTON_TOLERANCE;
            if converged && polished {
                break;
            }
            let h = JACOBIAN_STEP;
            let (a_p, a_m) = (residual(nu + h, nv)?, residual(nu - h, nv)?);
            let (b_p, b_m) = (residual(nu, nv + h)?, residual(nu, nv - h)?);
            let j11 = (a_p.0 - a_m.0) / (2.0 * h);
            let j21 = (a_p.1 - a_m.1) / (2.0 * h);
            let j12 = (b_p.0 - b_m.0) / (2.0 * h);
            let j22 = (b_p.1 - b_m.1) / (2.0 * h);
            let det = j11 * j22 - j12 * j21;
            if !(det.abs() > 1e-14) {
                return Err(RpcError::InversionFailed {
                    iterations: 0,
                    residual: pixel_residual(r),
                });
            }
            let step_u = (j22 * r.0 - j12 * r.1) / det;
            let step_v = (j11 * r.1 - j21 * r.0) / det;
            let (cand_u, cand_v) = (nu - step_u, nv - step_v);
            let cand_r = residual(cand_u, cand_v)?;
            if converged {
                // polishing step: keep it only if it helps
                if cand_r.0.abs().max(cand_r.1.abs()) <= r.0.abs().max(r.1.abs()) {
                    nu = cand_u;
                    nv = cand_v;
                    r = cand_r;
                }
                polished = true;
                continue;
            }
            nu = cand_u;
            nv = cand_v;
            r = cand_r;
        }
        if !(r.0.abs().max(r.1.abs()) < NEWTON_TOLERANCE) {
            return Err(RpcError::InversionFailed {
                iterations: NEWTON_MAX_ITERATIONS,
                residual: pixel_residual(r),
            });
        }
        Ok(GroundPoint {
            u: nu * n.u_scale + n.u_off - self.bias.du,
            v: nv * n.v_scale + n.v_off - self.bias.dv,
            z,
        })
    }

    /// Image-space correction (Δs, Δl) that `shift` induces at `p`.
    pub fn bias_correction(
        &self,
        shift: ObjectShift,
        p: GroundPoint,
    ) -> Result<BiasCorrection, RpcError> {
        let before = self.project(p)?;
        let after = self.apply_bias(shift).project(p)?;
        Ok(BiasCorrection {
            du: shift.du,
            dv: shift.dv,
            dz: shift.dz,
            ds: after.s - before.s,
            dl: after.l - before.l,
        })
    }

    /// Local viewing ray at `at`, in meters, pointing upwards by `dz_probe`.
    pub fn viewing_ray(
        &self,
        at: GroundPoint,
        dz_probe: f64,
        scale: GroundScale,
    ) -> Result<[f64; 3], RpcError> {
        let ip = self.project(at)?;
        let low = self.invert(ip, at.z)?;
        let high = self.invert(ip, at.z + dz_probe)?;
        Ok([
            (high.u - low.u) * scale.meters_per_u,
            (high.v - low.v) * scale.meters_per_v,
            high.z - low.z,
        ])
    }
}

/// Angle in degrees between the viewing rays of two models at a ground point.
pub fn intersection_angle(
    a: &RpcModel,
    b: &RpcModel,
    at: GroundPoint,
    dz_probe: f64,
    scale: GroundScale,
) -> Result<f64, RpcError> {
    if !(dz_probe > 0.0 && dz_probe.is_finite()) {
        return Err(RpcError::InvalidArgument(format!(
            "height probe must be positive, got {dz_probe}"
        )));
    }
    let ra = a.viewing_ray(at, dz_probe, scale)?;
    let rb = b.viewing_ray(at, dz_probe, scale)?;
    Ok(angle_between(ra, rb))
}

/// Unsigned angle between two vectors in degrees, well conditioned near 0 and 180.
pub fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    sin.atan2(cos).to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_like() -> RpcModel {
        RpcModel::affine(
            Normalization::identity(),
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn identity_like_projection() {
        let ip = identity_like().project(GroundPoint::new(0.3, -0.2, 0.0)).unwrap();
        assert_eq!(ip, ImagePoint::new(0.3, -0.2));
    }

    #[test]
    fn normalized_origin_isolates_constant_terms() {
        let mut num_s = [0.0; N_TERMS];
        let mut den_s = [0.0; N_TERMS];
        for (i, (n, d)) in num_s.iter_mut().zip(den_s.iter_mut()).enumerate() {
            *n = 0.5 + i as f64;
            *d = 2.0 - 0.01 * i as f64;
        }
        let norm = Normalization {
            samp_off: 5000.0,
            samp_scale: 4000.0,
            line_off: 3000.0,
            line_scale: 2500.0,
            u_off: -117.5,
            u_scale: 0.05,
            v_off: 34.2,
            v_scale: 0.04,
            z_off: 200.0,
            z_scale: 400.0,
        };
        let m = RpcModel::new(num_s, den_s, num_s, den_s, norm).unwrap();
        let ip = m.project(GroundPoint::new(-117.5, 34.2, 200.0)).unwrap();
        assert_eq!(ip.s, 4000.0 * (0.5 / 2.0) + 5000.0);
        assert_eq!(ip.l, 2500.0 * (0.5 / 2.0) + 3000.0);
    }

    #[test]
    fn monomial_order() {
        let (u, v, z) = (2.0, 3.0, 5.0);
        let expected = [
            1.0, u, v, z, u * v, u * z, v * z, u * u, v * v, z * z, u * v * z, u * u * u,
            u * v * v, u * z * z, u * u * v, v * v * v, v * z * z, u * u * z, v * v * z,
            z * z * z,
        ];
        assert_eq!(monomials(u, v, z), expected);
    }

    #[test]
    fn validation_rejects_bad_models() {
        let mut den = [0.0; N_TERMS];
        let num = [0.0; N_TERMS];
        assert!(RpcModel::new(num, den, num, den, Normalization::identity()).is_err());
        den[0] = 1.0;
        let mut norm = Normalization::identity();
        norm.z_scale = 0.0;
        assert!(RpcModel::new(num, den, num, den, norm).is_err());
    }

    #[test]
    fn degenerate_denominator() {
        let mut den = [0.0; N_TERMS];
        den[0] = 1.0;
        den[1] = -1.0;
        let mut num = [0.0; N_TERMS];
        num[1] = 1.0;
        let m = RpcModel::new(num, den, num, den, Normalization::identity()).unwrap();
        assert!(matches!(
            m.project(GroundPoint::new(1.0, 0.0, 0.0)),
            Err(RpcError::DegenerateDenominator(_))
        ));
    }

    #[test]
    fn out_of_domain_flag() {
        let m = identity_like();
        let (ip, flagged) = m.project_flagged(GroundPoint::new(2.0, 0.0, 0.0)).unwrap();
        assert!(flagged);
        assert_eq!(ip.s, 2.0);
        assert!(!m.project_flagged(GroundPoint::new(1.0, 1.5, -1.5)).unwrap().1);
    }

    #[test]
    fn invert_identity_round_trip() {
        let m = identity_like();
        let p = GroundPoint::new(0.3, -0.2, 0.7);
        let back = m.invert(m.project(p).unwrap(), p.z).unwrap();
        assert!((back.u - p.u).abs() < 1e-6 && (back.v - p.v).abs() < 1e-6);
        assert_eq!(back.z, p.z);
    }

    #[test]
    fn invert_constant_numerators_fails() {
        let m = RpcModel::affine(
            Normalization::identity(),
            [0.5, 0.0, 0.0, 0.0],
            [0.1, 0.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(
            m.invert(ImagePoint::new(0.0, 0.0), 0.0),
            Err(RpcError::InversionFailed { .. })
        ));
    }

    #[test]
    fn bias_on_linear_model() {
        let mut norm = Normalization::identity();
        norm.samp_scale = 250.0;
        let m = RpcModel::affine(norm, [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]).unwrap();
        let p = GroundPoint::new(0.2, 0.1, 0.0);
        let c = m.bias_correction(ObjectShift::new(0.1, 0.0, 0.0), p).unwrap();
        assert!((c.ds - 0.1 * 250.0).abs() < 1e-9);
        assert_eq!(c.dl, 0.0);
        let zero = m.bias_correction(ObjectShift::default(), p).unwrap();
        assert_eq!((zero.ds, zero.dl), (0.0, 0.0));
    }

    #[test]
    fn same_model_angle_is_zero() {
        let m = identity_like();
        let at = GroundPoint::new(0.1, 0.2, 0.0);
        let mut norm = Normalization::identity();
        norm.z_scale = 100.0;
        let oblique =
            RpcModel::affine(norm, [0.0, 1.0, 0.0, -3.0], [0.0, 0.0, 1.0, 0.5]).unwrap();
        for model in [&m, &oblique] {
            let a = intersection_angle(model, model, at, 100.0, GroundScale::meters()).unwrap();
            assert!(a.abs() < 1e-6);
        }
        assert!(intersection_angle(&m, &m, at, 0.0, GroundScale::meters()).is_err());
    }

    #[test]
    fn angle_between_basics() {
        assert!((angle_between([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]) - 90.0).abs() < 1e-12);
        assert!((angle_between([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]) - 180.0).abs() < 1e-12);
    }
}
