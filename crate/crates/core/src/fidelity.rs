//! How well field fragments distinguish the momenta p and p'.
//!
//! A mode displaced by Δβ from a thermal state has Uhlmann fidelity
//! exp(−|Δβ|² tanh(θ_T ω/2)/2); products over a patch of modes become
//! integrals in the continuum.

use crate::decoherence::{classify, Regime};
use crate::geometry::{polarization_basis, Polarization, SolidAngleRegion, SphereQuadrature, UnitDirection};
use crate::kernels::{closed, quad};
use crate::model::{displacement_amplitude, tau_f_over_cutoff, MomentumVector, PhysicalScenario};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const FOUR_PI: f64 = 4.0 * PI;

/// Patch fraction above which the point-like closed form is not trusted.
pub const SMALL_PATCH_FRACTION: f64 = 0.1;

/// A patch of directions with one polarization, read by one observer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Macrofraction {
    pub center: UnitDirection,
    /// ΔΩ0 in steradians.
    pub solid_angle: f64,
    pub polarization: Polarization,
}

impl Macrofraction {
    pub fn new(center: UnitDirection, solid_angle: f64, polarization: Polarization) -> Result<Self> {
        let m = Self {
            center,
            solid_angle,
            polarization,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.solid_angle > 0.0 && self.solid_angle < FOUR_PI) {
            return Err(Error::InvalidParameter(format!(
                "macrofraction solid angle must lie in (0, 4π), got {}",
                self.solid_angle
            )));
        }
        if self.solid_angle / FOUR_PI > SMALL_PATCH_FRACTION {
            log::warn!(
                "macrofraction covers {:.3} of the sphere; the small-patch form assumes <= {SMALL_PATCH_FRACTION}",
                self.solid_angle / FOUR_PI
            );
        }
        Ok(())
    }

    pub fn region(&self) -> SolidAngleRegion {
        SolidAngleRegion::PatchAround {
            center: self.center,
            solid_angle: self.solid_angle,
        }
    }

    /// ε_{k0,j}
    pub fn polarization_vector(&self) -> UnitDirection {
        *polarization_basis(&self.center).vector(self.polarization)
    }

    /// f(Δp) = αΔΩ0(ε·Δp)²/(4π²).
    pub fn prefactor(&self, dp: &MomentumVector, sc: &PhysicalScenario) -> f64 {
        let e = self.polarization_vector().as_vector().dot(dp);
        sc.coupling_alpha * self.solid_angle * e * e / (4.0 * PI * PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityResult {
    pub log_b: f64,
    pub b: f64,
    pub regime_label: Regime,
    pub near_boundary: bool,
}

impl FidelityResult {
    fn new(log_b: f64, regime_label: Regime, near_boundary: bool) -> Self {
        let log_b = log_b.min(0.0);
        Self {
            log_b,
            b: log_b.exp(),
            regime_label,
            near_boundary,
        }
    }
}

/// A single field mode in cutoff units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMode {
    pub khat: UnitDirection,
    pub omega: f64,
    pub polarization: Polarization,
}

impl FieldMode {
    /// Thermal occupation 1/(e^{θ_T ω} − 1).
    pub fn mean_occupation(&self, sc: &PhysicalScenario) -> f64 {
        1.0 / (sc.cutoff_over_thermal * self.omega).exp_m1()
    }

    fn coupling(&self, dp: &MomentumVector) -> f64 {
        polarization_basis(&self.khat).vector(self.polarization).as_vector().dot(dp)
    }
}

/// ν = 1 − k̂·v̂0 β.
pub fn doppler_factor(khat: &UnitDirection, sc: &PhysicalScenario) -> f64 {
    1.0 - khat.dot(&sc.velocity_direction()) * sc.velocity_beta
}

/// Δβ = √(2w)(ε·Δp)α̃(s): the relative displacement of the two conditional
/// mode states, with `mode_weight` w absorbing α and the mode density.
pub fn mode_displacement(
    mode: &FieldMode,
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    sc: &PhysicalScenario,
    mode_weight: f64,
) -> Result<Complex64> {
    let amp = displacement_amplitude(s, &mode.khat, mode.omega, sc)?;
    Ok(amp * ((2.0 * mode_weight).sqrt() * mode.coupling(&(p - p_prime))))
}

/// −|Δβ|²/2 · tanh(θ_T ω/2).
pub fn log_b_mode(
    mode: &FieldMode,
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    sc: &PhysicalScenario,
    mode_weight: f64,
) -> Result<f64> {
    let db = mode_displacement(mode, s, p, p_prime, sc, mode_weight)?;
    Ok(-0.5 * db.norm_sqr() * (0.5 * sc.cutoff_over_thermal * mode.omega).tanh())
}

/// −|Δβ|²/2 · coth(θ_T ω/2): the same mode's contribution to log|D|.
pub fn log_decoherence_mode(
    mode: &FieldMode,
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    sc: &PhysicalScenario,
    mode_weight: f64,
) -> Result<f64> {
    let db = mode_displacement(mode, s, p, p_prime, sc, mode_weight)?;
    Ok(-0.5 * db.norm_sqr() / (0.5 * sc.cutoff_over_thermal * mode.omega).tanh())
}

/// log B for polarization `j` over an arbitrary region, by quadrature in
/// both angle (outer) and frequency (inner).
pub fn log_b_region(
    region: &SolidAngleRegion,
    polarization: Polarization,
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    sc: &PhysicalScenario,
    sphere: &SphereQuadrature,
) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let dp = p - p_prime;
    let theta = sc.cutoff_over_thermal;
    let [v] = sphere.try_integrate(region, |k| {
        let e = polarization_basis(k).vector(polarization).as_vector().dot(&dp);
        if e == 0.0 {
            return Ok([0.0]);
        }
        let nu = doppler_factor(k, sc);
        Ok([e * e * quad::fidelity(nu * s, theta)? / (nu * nu)])
    })?;
    Ok((-sc.coupling_alpha / PI * v).min(0.0))
}

pub fn log_b_macrofraction_exact(
    mac: &Macrofraction,
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    sc: &PhysicalScenario,
) -> Result<FidelityResult> {
    let sphere = SphereQuadrature {
        rel_tol: 1e-8,
        ..Default::default()
    };
    let log_b = log_b_region(&mac.region(), mac.polarization, s, p, p_prime, sc, &sphere)?;
    Ok(FidelityResult::new(log_b, Regime::Exact, false))
}

/// Point-like patch: −(f/ν²)·K_F(νs), with the cutoff-inclusive kernel K_F.
pub fn log_b_small_patch(
    mac: &Macrofraction,
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    sc: &PhysicalScenario,
) -> FidelityResult {
    let f = mac.prefactor(&(p - p_prime), sc);
    let nu = doppler_factor(&mac.center, sc);
    let log_b = if f == 0.0 || s == 0.0 {
        0.0
    } else {
        -f / (nu * nu) * closed::fidelity(nu * s, sc.cutoff_over_thermal)
    };
    FidelityResult::new(log_b, Regime::Exact, false)
}

/// lim_{s→∞} B of the point-like patch.
pub fn b_floor(mac: &Macrofraction, p: &MomentumVector, p_prime: &MomentumVector, sc: &PhysicalScenario) -> f64 {
    log_b_floor(mac, p, p_prime, sc).exp()
}

pub fn log_b_floor(mac: &Macrofraction, p: &MomentumVector, p_prime: &MomentumVector, sc: &PhysicalScenario) -> f64 {
    let f = mac.prefactor(&(p - p_prime), sc);
    if f == 0.0 {
        return 0.0;
    }
    let nu = doppler_factor(&mac.center, sc);
    -f / (nu * nu) * closed::fidelity_saturation(sc.cutoff_over_thermal)
}

/// The printed table row for `regime`, returned as −log B.
pub fn fidelity_row(regime: Regime, s: f64, f: f64, nu: f64, sc: &PhysicalScenario) -> f64 {
    match regime {
        Regime::SubCutoff => f * s * s / 2.0,
        Regime::VacuumLog => f / (nu * nu) * (nu * s).ln(),
        Regime::ThermalLinear => f / (nu * nu) * (2.0 * tau_f_over_cutoff(sc)).ln(),
        Regime::Exact => f / (nu * nu) * closed::fidelity(nu * s, sc.cutoff_over_thermal),
    }
}

pub fn fidelity_regime(
    mac: &Macrofraction,
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    sc: &PhysicalScenario,
) -> FidelityResult {
    let (regime, near) = classify(s, tau_f_over_cutoff(sc));
    if near {
        log::debug!("s = {s} is near a regime boundary; {regime} fidelity row is approximate");
    }
    let f = mac.prefactor(&(p - p_prime), sc);
    let nu = doppler_factor(&mac.center, sc);
    FidelityResult::new(-fidelity_row(regime, s, f, nu, sc), regime, near)
}
