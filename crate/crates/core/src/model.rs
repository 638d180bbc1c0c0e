//! Dimensionless parameterization of the charge–field scenario.

use crate::geometry::UnitDirection;
use crate::{Error, Result};
use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Momentum in units of m0c.
pub type MomentumVector = Vector3<f64>;

/// θ_T below which the thermal closed forms lose their k_BT ≪ ħΩ̄ footing.
pub const LOW_THERMAL_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRegularization {
    /// Frequency integrals damped by e^{−ω/Ω̄}.
    #[default]
    ExponentialDamping,
}

/// The charge moves along +z with speed `velocity_beta`·c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalScenario {
    pub coupling_alpha: f64,
    /// θ_T = ħΩ̄/(k_B T)
    pub cutoff_over_thermal: f64,
    pub velocity_beta: f64,
    /// δp0/(m0c)
    pub momentum_spread: f64,
    #[serde(default)]
    pub cutoff_regularization: CutoffRegularization,
}

impl PhysicalScenario {
    pub fn new(alpha: f64, theta_t: f64, beta: f64, spread: f64) -> Result<Self> {
        let sc = Self {
            coupling_alpha: alpha,
            cutoff_over_thermal: theta_t,
            velocity_beta: beta,
            momentum_spread: spread,
            cutoff_regularization: CutoffRegularization::ExponentialDamping,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.coupling_alpha >= 0.0 && self.coupling_alpha.is_finite()) {
            return bad("coupling_alpha must be finite and >= 0");
        }
        if !(self.cutoff_over_thermal > 0.0 && self.cutoff_over_thermal.is_finite()) {
            return bad("cutoff_over_thermal must be finite and > 0");
        }
        if !(0.0..1.0).contains(&self.velocity_beta) {
            return bad("velocity_beta must lie in [0, 1)");
        }
        if !(self.momentum_spread > 0.0 && self.momentum_spread < 1.0) {
            return bad("momentum_spread must lie in (0, 1)");
        }
        if self.is_low_thermal() {
            log::warn!(
                "θ_T = {} < {LOW_THERMAL_THRESHOLD}: thermal closed forms assume k_BT ≪ ħΩ̄",
                self.cutoff_over_thermal
            );
        }
        Ok(())
    }

    pub fn is_low_thermal(&self) -> bool {
        self.cutoff_over_thermal < LOW_THERMAL_THRESHOLD
    }

    pub fn velocity_direction(&self) -> UnitDirection {
        UnitDirection::z()
    }

    /// Ω̄τ_F = θ_T/π.
    pub fn tau_f(&self) -> f64 {
        tau_f_over_cutoff(self)
    }
}

/// Ω̄τ_F with τ_F = ħ/(πk_BT).
pub fn tau_f_over_cutoff(scenario: &PhysicalScenario) -> f64 {
    scenario.cutoff_over_thermal / PI
}

/// Doppler-shifted frequency ω(1 − k̂·v̂0 β) in cutoff units.
pub fn doppler_detuning(khat: &UnitDirection, omega: f64, scenario: &PhysicalScenario) -> f64 {
    omega * (1.0 - khat.dot(&scenario.velocity_direction()) * scenario.velocity_beta)
}

/// α_k(t) = [1 − e^{iδs}]/δ with δ = ω − k·v0, up to the constant phase e^{−ik·r0}.
pub fn displacement_amplitude(
    s: f64,
    khat: &UnitDirection,
    omega_over_cutoff: f64,
    scenario: &PhysicalScenario,
) -> Result<Complex64> {
    if !(omega_over_cutoff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mode frequency must be positive, got {omega_over_cutoff}"
        )));
    }
    if s < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {s}")));
    }
    let delta = doppler_detuning(khat, omega_over_cutoff, scenario);
    if delta.abs() <= 8.0 * f64::EPSILON * omega_over_cutoff {
        return Err(Error::DopplerSingularity { detuning: delta });
    }
    // 1 − e^{ix} = −2i sin(x/2) e^{ix/2}
    let half = 0.5 * delta * s;
    Ok(Complex64::new(0.0, -2.0 * half.sin() / delta) * Complex64::from_polar(1.0, half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scenario(beta: f64) -> PhysicalScenario {
        PhysicalScenario::new(1.0, 400.0, beta, 0.05).unwrap()
    }

    #[test]
    fn tau_f_values() {
        let mut sc = scenario(0.0);
        sc.cutoff_over_thermal = PI;
        assert_relative_eq!(tau_f_over_cutoff(&sc), 1.0);
        sc.cutoff_over_thermal = 400.0;
        assert_relative_eq!(tau_f_over_cutoff(&sc), 127.32395447351627, max_relative = 1e-15);
        sc.cutoff_over_thermal = 25.0;
        assert_relative_eq!(tau_f_over_cutoff(&sc), 7.957747154594767, max_relative = 1e-15);
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        assert!(PhysicalScenario::new(-1.0, 10.0, 0.0, 0.05).is_err());
        assert!(PhysicalScenario::new(1.0, 0.0, 0.0, 0.05).is_err());
        assert!(PhysicalScenario::new(1.0, 10.0, 1.0, 0.05).is_err());
        assert!(PhysicalScenario::new(1.0, 10.0, 0.1, 0.0).is_err());
        assert!(PhysicalScenario::new(1.0, 5.0, 0.1, 0.1).unwrap().is_low_thermal());
    }

    #[test]
    fn amplitude_vanishes_at_zero_time() {
        let a = displacement_amplitude(0.0, &UnitDirection::x(), 0.7, &scenario(0.3)).unwrap();
        assert_eq!(a.norm(), 0.0);
    }

    #[test]
    fn static_resonance_free_modulus() {
        let a = displacement_amplitude(PI, &UnitDirection::x(), 1.0, &scenario(0.0)).unwrap();
        assert_relative_eq!(a.norm_sqr(), 4.0, max_relative = 1e-15);
    }

    #[test]
    fn antiparallel_mode_agrees_with_direct_arithmetic() {
        let khat = UnitDirection::new(0.0, 0.0, -1.0).unwrap();
        let a = displacement_amplitude(1.0, &khat, 1.0, &scenario(0.1)).unwrap();
        let delta = 1.1;
        let direct = (Complex64::new(1.0, 0.0) - Complex64::new(0.0, delta).exp()) / delta;
        assert!((a - direct).norm() < 1e-14);
        let modulus2 = 2.0 * (1.0 - delta.cos()) / (delta * delta);
        assert_relative_eq!(a.norm_sqr(), modulus2, max_relative = 1e-14);
    }

    #[test]
    fn superluminal_degenerate_input_is_singular() {
        let mut sc = scenario(0.0);
        sc.velocity_beta = 1.0;
        let err = displacement_amplitude(1.0, &UnitDirection::z(), 1.0, &sc).unwrap_err();
        assert!(matches!(err, Error::DopplerSingularity { .. }));
    }

    proptest! {
        #[test]
        fn doppler_covariance(s in 0.0..50.0f64, omega in 0.01..5.0f64, beta in 0.0..0.9f64,
                              theta in 0.0..PI, phi in 0.0..(2.0 * PI)) {
            let khat = UnitDirection::from_spherical(theta, phi);
            let moving = displacement_amplitude(s, &khat, omega, &scenario(beta)).unwrap();
            let shifted = omega * (1.0 - theta.cos() * beta);
            let rest = displacement_amplitude(s, &khat, shifted, &scenario(0.0)).unwrap();
            prop_assert!((moving.norm() - rest.norm()).abs() <= 1e-12 * (1.0 + rest.norm()));
        }

        #[test]
        fn modulus_identity(s in 0.0..1e3f64, omega in 0.01..5.0f64, beta in 0.0..0.5f64, cz in -1.0..1.0f64) {
            let khat = UnitDirection::new((1.0 - cz * cz).sqrt(), 0.0, cz).unwrap();
            let a = displacement_amplitude(s, &khat, omega, &scenario(beta)).unwrap();
            let d = omega * (1.0 - cz * beta);
            let m2 = 2.0 * (1.0 - (d * s).cos()) / (d * d);
            prop_assert!((a.norm_sqr() - m2).abs() <= 1e-9 * (1.0 + m2));
        }
    }
}
