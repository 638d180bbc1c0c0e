//! Directions, polarization frames and solid-angle integration.
//!
//! Regions are integrated with a product rule: Gauss–Legendre in cosθ and a
//! periodic trapezoid in φ (Gauss–Legendre when the φ range is partial),
//! doubling the order until successive estimates agree.

use crate::model::MomentumVector;
use crate::{Error, Result};
use gauss_quad::GaussLegendre;
use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::num::NonZeroUsize;

const FOUR_PI: f64 = 4.0 * PI;

/// A point on the direction sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitDirection(Vector3<f64>);

impl UnitDirection {
    /// Normalizes `(x, y, z)`; fails on a zero or non-finite vector.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter(format!("cannot normalize direction {v:?}")));
        }
        Ok(Self(v / n))
    }

    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let st = theta.sin();
        Self(Vector3::new(st * phi.cos(), st * phi.sin(), theta.cos()))
    }

    pub fn x() -> Self {
        Self(Vector3::x())
    }
    pub fn y() -> Self {
        Self(Vector3::y())
    }
    pub fn z() -> Self {
        Self(Vector3::z())
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.dot(&other.0)
    }

    /// Polar angle from +z.
    pub fn theta(&self) -> f64 {
        self.0.z.clamp(-1.0, 1.0).acos()
    }

    /// Azimuth in [0, 2π).
    pub fn phi(&self) -> f64 {
        let p = self.0.y.atan2(self.0.x);
        if p < 0.0 {
            p + 2.0 * PI
        } else {
            p
        }
    }

    pub fn angle_to(&self, other: &Self) -> f64 {
        // atan2 form stays accurate for nearly (anti)parallel pairs
        self.0.cross(&other.0).norm().atan2(self.dot(other))
    }

    pub fn rotated(&self, r: &Rotation3<f64>) -> Self {
        Self(r * self.0)
    }
}

impl TryFrom<[f64; 3]> for UnitDirection {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<UnitDirection> for [f64; 3] {
    fn from(u: UnitDirection) -> Self {
        [u.0.x, u.0.y, u.0.z]
    }
}

/// Polarization index j ∈ {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Polarization {
    First,
    Second,
}

impl TryFrom<u8> for Polarization {
    type Error = Error;
    fn try_from(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Polarization::First),
            2 => Ok(Polarization::Second),
            _ => Err(Error::InvalidParameter(format!("polarization index must be 1 or 2, got {j}"))),
        }
    }
}

impl From<Polarization> for u8 {
    fn from(p: Polarization) -> u8 {
        match p {
            Polarization::First => 1,
            Polarization::Second => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationBasis {
    pub e1: UnitDirection,
    pub e2: UnitDirection,
}

impl PolarizationBasis {
    pub fn vector(&self, j: Polarization) -> &UnitDirection {
        match j {
            Polarization::First => &self.e1,
            Polarization::Second => &self.e2,
        }
    }
}

/// e1 = ê_θ, e2 = ê_φ; at the poles e1 = x̂, e2 = ±ŷ so that (e1, e2, k̂) stays right-handed.
pub fn polarization_basis(khat: &UnitDirection) -> PolarizationBasis {
    let k = khat.as_vector();
    let rho = k.x.hypot(k.y);
    if rho < 1e-8 {
        let sign = if k.z > 0.0 { 1.0 } else { -1.0 };
        return PolarizationBasis {
            e1: UnitDirection::x(),
            e2: UnitDirection(Vector3::new(0.0, sign, 0.0)),
        };
    }
    let (cp, sp) = (k.x / rho, k.y / rho);
    PolarizationBasis {
        e1: UnitDirection(Vector3::new(k.z * cp, k.z * sp, -rho)),
        e2: UnitDirection(Vector3::new(-sp, cp, 0.0)),
    }
}

/// Δp² − (Δp·k̂)², clamped into [0, Δp²].
pub fn transversal_norm2(dp: &MomentumVector, khat: &UnitDirection) -> f64 {
    let d2 = dp.norm_squared();
    let l = dp.dot(khat.as_vector());
    (d2 - l * l).clamp(0.0, d2)
}

/// Angles in radians; PolarCap φ ranges may not exceed 2π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SolidAngleRegion {
    PolarCap {
        theta_min: f64,
        theta_max: f64,
        phi_min: f64,
        phi_max: f64,
    },
    PatchAround {
        center: UnitDirection,
        solid_angle: f64,
    },
    Complement(Box<SolidAngleRegion>),
    /// Members must be pairwise disjoint.
    Union(Vec<SolidAngleRegion>),
    FullSphere,
}

impl SolidAngleRegion {
    /// Cap θ ∈ [0, θmax] about +z over all azimuths.
    pub fn cap(theta_max: f64) -> Self {
        SolidAngleRegion::PolarCap {
            theta_min: 0.0,
            theta_max,
            phi_min: 0.0,
            phi_max: 2.0 * PI,
        }
    }

    pub fn complement(self) -> Self {
        SolidAngleRegion::Complement(Box::new(self))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            SolidAngleRegion::PolarCap {
                theta_min,
                theta_max,
                phi_min,
                phi_max,
            } => {
                if !(0.0 <= *theta_min && theta_min <= theta_max && *theta_max <= PI + 1e-12) {
                    return bad(format!("polar cap needs 0 <= θmin <= θmax <= π, got [{theta_min}, {theta_max}]"));
                }
                if !(phi_min <= phi_max && phi_max - phi_min <= 2.0 * PI + 1e-12) {
                    return bad(format!("polar cap needs φmin <= φmax <= φmin + 2π, got [{phi_min}, {phi_max}]"));
                }
                Ok(())
            }
            SolidAngleRegion::PatchAround { solid_angle, .. } => {
                if !(*solid_angle > 0.0 && *solid_angle <= FOUR_PI * (1.0 + 1e-12)) {
                    return bad(format!("patch solid angle must lie in (0, 4π], got {solid_angle}"));
                }
                Ok(())
            }
            SolidAngleRegion::Complement(r) => r.validate(),
            SolidAngleRegion::Union(rs) => {
                rs.iter().try_for_each(|r| r.validate())?;
                if self.measure() > FOUR_PI * (1.0 + 1e-9) {
                    return bad("union members overlap: total measure exceeds 4π".into());
                }
                Ok(())
            }
            SolidAngleRegion::FullSphere => Ok(()),
        }
    }

    /// Solid angle in steradians.
    pub fn measure(&self) -> f64 {
        match self {
            SolidAngleRegion::PolarCap {
                theta_min,
                theta_max,
                phi_min,
                phi_max,
            } => (phi_max - phi_min) * (theta_min.cos() - theta_max.cos()),
            SolidAngleRegion::PatchAround { solid_angle, .. } => *solid_angle,
            SolidAngleRegion::Complement(r) => FOUR_PI - r.measure(),
            SolidAngleRegion::Union(rs) => rs.iter().map(|r| r.measure()).sum(),
            SolidAngleRegion::FullSphere => FOUR_PI,
        }
    }

    pub fn contains(&self, k: &UnitDirection) -> bool {
        match self {
            SolidAngleRegion::PolarCap {
                theta_min,
                theta_max,
                phi_min,
                phi_max,
            } => {
                let t = k.theta();
                if t < *theta_min || t > *theta_max {
                    return false;
                }
                let span = phi_max - phi_min;
                span >= 2.0 * PI - 1e-12 || (k.phi() - phi_min).rem_euclid(2.0 * PI) <= span
            }
            SolidAngleRegion::PatchAround { center, solid_angle } => {
                k.angle_to(center) <= patch_half_angle(*solid_angle)
            }
            SolidAngleRegion::Complement(r) => !r.contains(k),
            SolidAngleRegion::Union(rs) => rs.iter().any(|r| r.contains(k)),
            SolidAngleRegion::FullSphere => true,
        }
    }

    /// Rigid rotation. Polar caps are tied to the z-axis and only rotate about it.
    pub fn rotated(&self, r: &Rotation3<f64>) -> Result<Self> {
        Ok(match self {
            SolidAngleRegion::PolarCap {
                theta_min,
                theta_max,
                phi_min,
                phi_max,
            } => {
                let axis_moved = (r * Vector3::z() - Vector3::z()).norm();
                if axis_moved > 1e-12 {
                    return Err(Error::InvalidParameter(
                        "polar caps can only be rotated about the z-axis".into(),
                    ));
                }
                let shift = (r * Vector3::x()).y.atan2((r * Vector3::x()).x);
                SolidAngleRegion::PolarCap {
                    theta_min: *theta_min,
                    theta_max: *theta_max,
                    phi_min: phi_min + shift,
                    phi_max: phi_max + shift,
                }
            }
            SolidAngleRegion::PatchAround { center, solid_angle } => SolidAngleRegion::PatchAround {
                center: center.rotated(r),
                solid_angle: *solid_angle,
            },
            SolidAngleRegion::Complement(inner) => SolidAngleRegion::Complement(Box::new(inner.rotated(r)?)),
            SolidAngleRegion::Union(rs) => {
                SolidAngleRegion::Union(rs.iter().map(|x| x.rotated(r)).collect::<Result<_>>()?)
            }
            SolidAngleRegion::FullSphere => SolidAngleRegion::FullSphere,
        })
    }
}

/// Half-opening angle of a cap with the given solid angle.
pub fn patch_half_angle(solid_angle: f64) -> f64 {
    (1.0 - solid_angle / (2.0 * PI)).clamp(-1.0, 1.0).acos()
}

/// Rotation taking +z onto `center`.
fn rotation_to(center: &UnitDirection) -> Rotation3<f64> {
    let z = Vector3::z();
    Rotation3::rotation_between(&z, center.as_vector())
        .unwrap_or_else(|| Rotation3::from_axis_angle(&Unit::new_unchecked(Vector3::x()), PI))
}

/// A (cosθ, φ) rectangle, optionally carried onto another axis.
struct Chart {
    cos_lo: f64,
    cos_hi: f64,
    phi_lo: f64,
    phi_hi: f64,
    rotation: Option<Rotation3<f64>>,
}

impl Chart {
    fn periodic(&self) -> bool {
        self.phi_hi - self.phi_lo >= 2.0 * PI - 1e-12
    }
}

/// Region-wide product quadrature with order doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereQuadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Gauss–Legendre nodes in cosθ on the first pass; φ uses twice as many.
    pub initial_order: usize,
    pub max_order: usize,
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            initial_order: 4,
            max_order: 512,
        }
    }
}

impl SphereQuadrature {
    /// ∫_region f(k̂) dΩ/4π for an infallible integrand.
    pub fn integrate<F: Fn(&UnitDirection) -> f64>(&self, region: &SolidAngleRegion, f: F) -> Result<f64> {
        self.try_integrate(region, |k| Ok([f(k)])).map(|v| v[0])
    }

    /// ∫_region f(k̂) dΩ/4π, component-wise, propagating integrand errors.
    pub fn try_integrate<const K: usize, F>(&self, region: &SolidAngleRegion, f: F) -> Result<[f64; K]>
    where
        F: Fn(&UnitDirection) -> Result<[f64; K]>,
    {
        region.validate()?;
        let mut n = self.initial_order.max(1);
        let (mut prev, _) = eval_region(region, n, &f)?;
        loop {
            n *= 2;
            let (cur, mass) = eval_region(region, n, &f)?;
            let scale = cur.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let diff = cur
                .iter()
                .zip(prev.iter())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            // components that cancel to zero are judged against the integrand's L1 mass
            let floor = (ROUNDOFF * mass).max(self.abs_tol);
            if diff <= (self.rel_tol * scale).max(floor) {
                return Ok(cur);
            }
            if n >= self.max_order {
                return Err(Error::QuadratureFailure {
                    integrand: "solid-angle product rule",
                    s: f64::NAN,
                    error: diff,
                });
            }
            prev = cur;
        }
    }
}

const ROUNDOFF: f64 = 1e-14;

fn eval_region<const K: usize, F>(region: &SolidAngleRegion, n: usize, f: &F) -> Result<([f64; K], f64)>
where
    F: Fn(&UnitDirection) -> Result<[f64; K]>,
{
    match region {
        SolidAngleRegion::PolarCap {
            theta_min,
            theta_max,
            phi_min,
            phi_max,
        } => eval_chart(
            &Chart {
                cos_lo: theta_max.cos(),
                cos_hi: theta_min.cos(),
                phi_lo: *phi_min,
                phi_hi: *phi_max,
                rotation: None,
            },
            n,
            f,
        ),
        SolidAngleRegion::PatchAround { center, solid_angle } => eval_chart(
            &Chart {
                cos_lo: 1.0 - solid_angle / (2.0 * PI),
                cos_hi: 1.0,
                phi_lo: 0.0,
                phi_hi: 2.0 * PI,
                rotation: Some(rotation_to(center)),
            },
            n,
            f,
        ),
        SolidAngleRegion::FullSphere => eval_chart(
            &Chart {
                cos_lo: -1.0,
                cos_hi: 1.0,
                phi_lo: 0.0,
                phi_hi: 2.0 * PI,
                rotation: None,
            },
            n,
            f,
        ),
        SolidAngleRegion::Complement(inner) => {
            let (full, m1) = eval_region(&SolidAngleRegion::FullSphere, n, f)?;
            let (part, m2) = eval_region(inner, n, f)?;
            Ok((std::array::from_fn(|i| full[i] - part[i]), m1 + m2))
        }
        SolidAngleRegion::Union(rs) => {
            let mut acc = [0.0; K];
            let mut mass = 0.0;
            for r in rs {
                let (v, m) = eval_region(r, n, f)?;
                mass += m;
                for i in 0..K {
                    acc[i] += v[i];
                }
            }
            Ok((acc, mass))
        }
    }
}

fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("order >= 1"));
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect()
}

fn eval_chart<const K: usize, F>(chart: &Chart, n: usize, f: &F) -> Result<([f64; K], f64)>
where
    F: Fn(&UnitDirection) -> Result<[f64; K]>,
{
    let mut acc = [0.0; K];
    let mut mass = 0.0;
    if chart.cos_hi <= chart.cos_lo || chart.phi_hi <= chart.phi_lo {
        return Ok((acc, mass));
    }
    let cos_nodes = gauss_legendre(n, chart.cos_lo, chart.cos_hi);
    let phi_nodes: Vec<(f64, f64)> = if chart.periodic() {
        let m = 2 * n;
        let h = (chart.phi_hi - chart.phi_lo) / m as f64;
        (0..m).map(|i| (chart.phi_lo + (i as f64 + 0.5) * h, h)).collect()
    } else {
        gauss_legendre(2 * n, chart.phi_lo, chart.phi_hi)
    };
    for &(c, wc) in &cos_nodes {
        let st = (1.0 - c * c).max(0.0).sqrt();
        for &(p, wp) in &phi_nodes {
            let mut v = Vector3::new(st * p.cos(), st * p.sin(), c);
            if let Some(r) = &chart.rotation {
                v = r * v;
            }
            let val = f(&UnitDirection(v))?;
            let w = wc * wp / FOUR_PI;
            let mut peak = 0.0f64;
            for i in 0..K {
                acc[i] += w * val[i];
                peak = peak.max(val[i].abs());
            }
            mass += w * peak;
        }
    }
    Ok((acc, mass))
}

/// Weight on the polar angle θ_k measured from v̂0 = +z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularWeight {
    One,
    CosTheta,
    Cos2Theta,
}

impl AngularWeight {
    fn eval(self, cos_theta: f64) -> f64 {
        match self {
            AngularWeight::One => 1.0,
            AngularWeight::CosTheta => cos_theta,
            AngularWeight::Cos2Theta => cos_theta * cos_theta,
        }
    }
}

/// M = ∫_region (dΩ/4π) w(θ_k) (I − k̂k̂ᵀ), so that the angular moment of Δp is ΔpᵀMΔp.
pub fn moment_tensor(region: &SolidAngleRegion, weight: AngularWeight) -> Result<Matrix3<f64>> {
    let v = SphereQuadrature::default().try_integrate(region, |k| {
        let kv = k.as_vector();
        let w = weight.eval(kv.z);
        let m = w * (Matrix3::identity() - kv * kv.transpose());
        let mut out = [0.0; 9];
        out.copy_from_slice(m.as_slice());
        Ok(out)
    })?;
    let m = Matrix3::from_column_slice(&v);
    Ok(0.5 * (m + m.transpose()))
}

/// ∫_region (dΩ/4π) w(θ_k) Δp²_⊥k.
pub fn angular_moment(region: &SolidAngleRegion, dp: &MomentumVector, weight: AngularWeight) -> Result<f64> {
    let m = moment_tensor(region, weight)?;
    Ok(dp.dot(&(m * dp)))
}

/// The three moment tensors of a region, reusable across momentum pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMoments {
    pub one: Matrix3<f64>,
    pub cos: Matrix3<f64>,
    pub cos2: Matrix3<f64>,
}

impl RegionMoments {
    pub fn compute(region: &SolidAngleRegion) -> Result<Self> {
        Ok(Self {
            one: moment_tensor(region, AngularWeight::One)?,
            cos: moment_tensor(region, AngularWeight::CosTheta)?,
            cos2: moment_tensor(region, AngularWeight::Cos2Theta)?,
        })
    }

    pub fn of(&self, dp: &MomentumVector) -> AngularMoments {
        let q = |m: &Matrix3<f64>| dp.dot(&(m * dp));
        AngularMoments {
            f0: q(&self.one),
            f1: 2.0 * q(&self.cos),
            f2: q(&self.cos2),
        }
    }
}

/// F0, F1 (with the factor 2 included) and F2 for a single Δp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularMoments {
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
}

impl AngularMoments {
    pub fn compute(region: &SolidAngleRegion, dp: &MomentumVector) -> Result<Self> {
        Ok(RegionMoments::compute(region)?.of(dp))
    }
}
