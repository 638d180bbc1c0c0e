//! The damping exponent Γ_{p,p'}(s) of momentum coherences.
//!
//! Γ factorizes into angular moments of Δp over the unobserved region and
//! frequency kernels:
//!
//! Γ = (α/π){[F0 + βF1]·K1(s) − (β/2)F1·s·K2(s)}
//!
//! with K1 = Γ1^vac + Γ1^th and s·K2 = s(Γ2^vac + Γ2^th), to first order in β.

use crate::geometry::{AngularMoments, RegionMoments, SolidAngleRegion, SphereQuadrature};
use crate::kernels::{closed, quad};
use crate::model::{tau_f_over_cutoff, MomentumVector, PhysicalScenario};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// s ≪ 1: time-dependent dressing.
    SubCutoff,
    /// 1 ≪ s ≪ Ω̄τ_F: vacuum decoherence.
    VacuumLog,
    /// s ≫ Ω̄τ_F: thermal decoherence.
    ThermalLinear,
    Exact,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SubCutoff => "SubCutoff",
            Regime::VacuumLog => "VacuumLog",
            Regime::ThermalLinear => "ThermalLinear",
            Regime::Exact => "Exact",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Nearest table row for `s`, and whether `s` lies outside the trusted
/// interior (s < 0.1, 10 < s < 0.1·Ω̄τ_F, s > 10·Ω̄τ_F).
pub fn classify(s: f64, tau_f: f64) -> (Regime, bool) {
    let interior = s < 0.1 || (s > 10.0 && s < 0.1 * tau_f) || s > 10.0 * tau_f;
    let regime = if s < 1.0 {
        Regime::SubCutoff
    } else if s < tau_f {
        Regime::VacuumLog
    } else {
        Regime::ThermalLinear
    };
    (regime, !interior)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceResult {
    pub gamma: f64,
    /// e^{−Γ}
    pub modulus: f64,
    pub regime_label: Regime,
    /// Set when a table row was used outside the interior of its regime.
    pub near_boundary: bool,
}

impl DecoherenceResult {
    fn new(gamma: f64, regime_label: Regime, near_boundary: bool) -> Self {
        let gamma = gamma.max(0.0);
        Self {
            gamma,
            modulus: (-gamma).exp(),
            regime_label,
            near_boundary,
        }
    }
}

fn prefactor(sc: &PhysicalScenario) -> f64 {
    sc.coupling_alpha / PI
}

/// Γ from precomputed angular moments.
pub fn gamma_from_moments(s: f64, m: &AngularMoments, sc: &PhysicalScenario) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let theta = sc.cutoff_over_thermal;
    let beta = sc.velocity_beta;
    let k1 = closed::decoherence(s, theta);
    let drift = closed::decoherence_drift(s, theta);
    (prefactor(sc) * ((m.f0 + beta * m.f1) * k1 - 0.5 * beta * m.f1 * drift)).max(0.0)
}

pub fn gamma_exact(
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    unobserved: &SolidAngleRegion,
    sc: &PhysicalScenario,
) -> Result<DecoherenceResult> {
    let m = AngularMoments::compute(unobserved, &(p - p_prime))?;
    Ok(DecoherenceResult::new(gamma_from_moments(s, &m, sc), Regime::Exact, false))
}

/// The printed table row for `regime`, without classification.
pub fn regime_row(regime: Regime, s: f64, m: &AngularMoments, sc: &PhysicalScenario) -> f64 {
    let beta = sc.velocity_beta;
    let tau = tau_f_over_cutoff(sc);
    let row = match regime {
        Regime::SubCutoff => m.f0 * s * s / 2.0,
        Regime::VacuumLog => (m.f0 + beta * m.f1) * s.ln() - 0.5 * beta * m.f1,
        Regime::ThermalLinear => {
            (m.f0 + 0.5 * beta * m.f1) * (s / tau) + (m.f0 + beta * m.f1) * tau.ln()
        }
        Regime::Exact => return gamma_from_moments(s, m, sc),
    };
    prefactor(sc) * row
}

pub fn gamma_regime_from_moments(s: f64, m: &AngularMoments, sc: &PhysicalScenario) -> DecoherenceResult {
    let (regime, near) = classify(s, tau_f_over_cutoff(sc));
    if near {
        log::debug!("s = {s} is near a regime boundary; {regime} row is approximate");
    }
    DecoherenceResult::new(regime_row(regime, s, m, sc), regime, near)
}

pub fn gamma_regime(
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    unobserved: &SolidAngleRegion,
    sc: &PhysicalScenario,
) -> Result<DecoherenceResult> {
    let m = AngularMoments::compute(unobserved, &(p - p_prime))?;
    Ok(gamma_regime_from_moments(s, &m, sc))
}

/// Γ^{(2)} − Γ^{(1)}: the (m0c)^{−4} cross term with Q = |p|²p − |p'|²p' and
/// the β² block weighted by F2 = ∫cos²θ Δp⊥².
pub fn gamma_relativistic_correction(
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    unobserved: &SolidAngleRegion,
    sc: &PhysicalScenario,
) -> Result<f64> {
    let moments = RegionMoments::compute(unobserved)?;
    Ok(relativistic_correction_from_moments(s, p, p_prime, &moments, sc))
}

pub fn relativistic_correction_from_moments(
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    moments: &RegionMoments,
    sc: &PhysicalScenario,
) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let theta = sc.cutoff_over_thermal;
    let beta = sc.velocity_beta;
    let dp = p - p_prime;
    let q = p.norm_squared() * p - p_prime.norm_squared() * p_prime;
    // Σ_j (Δp·ε_j)(Q·ε_j) = Δp·Q − (Δp·k̂)(Q·k̂)
    let cross = dp.dot(&(moments.one * q));
    let f2 = dp.dot(&(moments.cos2 * dp));
    let k1 = closed::decoherence(s, theta);
    let block = 2.0 * k1 - 2.0 * closed::decoherence_drift(s, theta) + closed::curvature(s, theta);
    prefactor(sc) * (k1 * cross + beta * beta * block * f2)
}

/// Ω̄τ_dip = m0c/δp0.
pub fn dipole_validity_time(sc: &PhysicalScenario) -> f64 {
    1.0 / sc.momentum_spread
}

/// Γ by direct angle × frequency quadrature, without expanding in β:
/// (α/π)∫dΩ/4π Δp⊥² K1(s(1 − βk_z))/(1 − βk_z)², with K1 by quadrature.
pub fn gamma_unexpanded(
    s: f64,
    p: &MomentumVector,
    p_prime: &MomentumVector,
    unobserved: &SolidAngleRegion,
    sc: &PhysicalScenario,
    sphere: &SphereQuadrature,
) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let dp = p - p_prime;
    let theta = sc.cutoff_over_thermal;
    let beta = sc.velocity_beta;
    let [v] = sphere.try_integrate(unobserved, |k| {
        let perp = crate::geometry::transversal_norm2(&dp, k);
        if perp == 0.0 {
            return Ok([0.0]);
        }
        let nu = 1.0 - beta * k.as_vector().z;
        Ok([perp * quad::decoherence(s * nu, theta)? / (nu * nu)])
    })?;
    Ok(prefactor(sc) * v)
}
