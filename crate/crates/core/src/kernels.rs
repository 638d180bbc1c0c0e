//! Frequency kernels of the decoherence and fidelity exponents.
//!
//! Each kernel is an integral over ω (cutoff units) carrying the e^{−ω}
//! regularization. [`closed`] holds exact closed forms, [`quad`] the
//! quadrature oracle and [`low_temperature`] the k_BT ≪ ħΩ̄ asymptotic forms
//! used by the regime table. The thermal closed forms come from expanding
//! coth/tanh in geometric series of e^{−θω} and summing Laplace transforms,
//! which produces log-gamma and polygamma functions of 1 + 1/θ + is/θ.

use crate::quadrature::{damped_transform, Estimate, NotConverged, Oscillation, TransformOptions};
use crate::special::{coth_half_minus_one, tanh_half_minus_one};
use crate::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub closed_form: Option<f64>,
    pub quadrature: f64,
    pub abs_discrepancy: f64,
}

impl KernelValue {
    fn new(closed_form: Option<f64>, quadrature: f64) -> Self {
        Self {
            closed_form,
            quadrature,
            abs_discrepancy: closed_form.map_or(0.0, |c| (c - quadrature).abs()),
        }
    }

    /// Closed form when available, quadrature otherwise.
    pub fn value(&self) -> f64 {
        self.closed_form.unwrap_or(self.quadrature)
    }

    /// Discrepancy relative to the larger magnitude.
    pub fn rel_discrepancy(&self) -> f64 {
        match self.closed_form {
            Some(c) => {
                let scale = c.abs().max(self.quadrature.abs());
                if scale == 0.0 {
                    0.0
                } else {
                    self.abs_discrepancy / scale
                }
            }
            None => 0.0,
        }
    }
}

fn check_inputs(s: f64, theta: Option<f64>) -> Result<()> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {s}")));
    }
    if let Some(t) = theta {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("θ_T must be finite and > 0, got {t}")));
        }
    }
    Ok(())
}

/// Γ1^vac: ∫(dω/ω)e^{−ω}(1 − cos ωs).
pub fn gamma1_vac(s: f64) -> Result<KernelValue> {
    check_inputs(s, None)?;
    Ok(KernelValue::new(Some(closed::gamma1_vac(s)), quad::gamma1_vac(s)?))
}

/// Γ1^th: ∫(dω/ω)e^{−ω}[coth(θω/2) − 1](1 − cos ωs).
pub fn gamma1_th(s: f64, theta: f64) -> Result<KernelValue> {
    check_inputs(s, Some(theta))?;
    Ok(KernelValue::new(Some(closed::gamma1_th(s, theta)), quad::gamma1_th(s, theta)?))
}

/// Γ2^vac: ∫dω e^{−ω} sin ωs (the bare kernel, without the factor s).
pub fn gamma2_vac(s: f64) -> Result<KernelValue> {
    check_inputs(s, None)?;
    Ok(KernelValue::new(Some(closed::gamma2_vac(s)), quad::gamma2_vac(s)?))
}

/// Γ2^th: ∫dω e^{−ω}[coth(θω/2) − 1] sin ωs.
pub fn gamma2_th(s: f64, theta: f64) -> Result<KernelValue> {
    check_inputs(s, Some(theta))?;
    Ok(KernelValue::new(Some(closed::gamma2_th(s, theta)), quad::gamma2_th(s, theta)?))
}

/// B^th: ∫(dω/ω)e^{−ω}[tanh(θω/2) − 1](1 − cos νωs); the vacuum part of the
/// fidelity kernel is Γ1^vac(νs).
pub fn b_th(s: f64, theta: f64, nu: f64) -> Result<KernelValue> {
    check_inputs(s, Some(theta))?;
    if !(nu > 0.0 && nu < 2.0) {
        return Err(Error::InvalidParameter(format!("Doppler factor must lie in (0, 2), got {nu}")));
    }
    let sn = nu * s;
    Ok(KernelValue::new(Some(closed::b_th(sn, theta)), quad::b_th(sn, theta)?))
}

/// I3^vac: ∫dω e^{−ω} ω cos ωs.
pub fn i3_vac(s: f64) -> Result<KernelValue> {
    check_inputs(s, None)?;
    Ok(KernelValue::new(Some(closed::i3_vac(s)), quad::i3_vac(s)?))
}

/// I3^th: ∫dω e^{−ω} ω [coth(θω/2) − 1] cos ωs.
pub fn i3_th(s: f64, theta: f64) -> Result<KernelValue> {
    check_inputs(s, Some(theta))?;
    Ok(KernelValue::new(Some(closed::i3_th(s, theta)), quad::i3_th(s, theta)?))
}

/// Exact closed forms, valid for every θ_T > 0.
pub mod closed {
    use crate::special::{digamma, ln_gamma, ln_gamma_real, trigamma};
    use num_complex::Complex64;

    pub fn gamma1_vac(s: f64) -> f64 {
        0.5 * (s * s).ln_1p()
    }

    /// 2[lnΓ(1+a) − Re lnΓ(1+a+iy)], a = 1/θ, y = s/θ.
    pub fn gamma1_th(s: f64, theta: f64) -> f64 {
        let a = 1.0 / theta;
        let y = s / theta;
        (2.0 * (ln_gamma_real(1.0 + a) - ln_gamma(Complex64::new(1.0 + a, y)).re)).max(0.0)
    }

    pub fn gamma2_vac(s: f64) -> f64 {
        s / (1.0 + s * s)
    }

    /// (2/θ) Im ψ(1+a+iy).
    pub fn gamma2_th(s: f64, theta: f64) -> f64 {
        let a = 1.0 / theta;
        2.0 / theta * digamma(Complex64::new(1.0 + a, s / theta)).im
    }

    /// Thermal part of the fidelity kernel at the Doppler-scaled time `sn = νs`.
    pub fn b_th(sn: f64, theta: f64) -> f64 {
        let a = 1.0 / theta;
        let w = sn / (2.0 * theta);
        let pair = |b: f64| 2.0 * (ln_gamma_real(b) - ln_gamma(Complex64::new(b, w)).re);
        (pair(1.0 + 0.5 * a) - pair(0.5 * (1.0 + a))).min(0.0)
    }

    pub fn i3_vac(s: f64) -> f64 {
        let d = 1.0 + s * s;
        (1.0 - s * s) / (d * d)
    }

    /// (2/θ²) Re ψ'(1+a+iy).
    pub fn i3_th(s: f64, theta: f64) -> f64 {
        let a = 1.0 / theta;
        2.0 / (theta * theta) * trigamma(Complex64::new(1.0 + a, s / theta)).re
    }

    /// K1 = Γ1^vac + Γ1^th, the coth-weighted decoherence kernel.
    pub fn decoherence(s: f64, theta: f64) -> f64 {
        gamma1_vac(s) + gamma1_th(s, theta)
    }

    /// s·(Γ2^vac + Γ2^th), the t-multiplied combination entering Γ.
    pub fn decoherence_drift(s: f64, theta: f64) -> f64 {
        s * (gamma2_vac(s) + gamma2_th(s, theta))
    }

    /// s²·(I3^vac + I3^th).
    pub fn curvature(s: f64, theta: f64) -> f64 {
        s * s * (i3_vac(s) + i3_th(s, theta))
    }

    /// Γ1^vac(νs) + B^th(νs): the tanh-weighted fidelity kernel.
    pub fn fidelity(sn: f64, theta: f64) -> f64 {
        gamma1_vac(sn) + b_th(sn, theta)
    }

    /// lim_{s→∞} of [`fidelity`]: ln(2θ) + 2[lnΓ(1 + a/2) − lnΓ(½ + a/2)] → ln(2Ω̄τ_F).
    pub fn fidelity_saturation(theta: f64) -> f64 {
        let a = 1.0 / theta;
        (2.0 * theta).ln() + 2.0 * (ln_gamma_real(1.0 + 0.5 * a) - ln_gamma_real(0.5 + 0.5 * a))
    }
}

/// Leading k_BT ≪ ħΩ̄ forms; errors are O(1/θ_T) against [`closed`].
pub mod low_temperature {
    use crate::special::{ln_sinhc, ln_tanhc};
    use std::f64::consts::PI;

    /// ln[sinh x / x], x = πs/θ = t/τ_F.
    pub fn gamma1_th(s: f64, theta: f64) -> f64 {
        ln_sinhc(PI * s / theta)
    }

    /// x coth x − 1/(1 + s²), the main-text form of s·(Γ2^vac + Γ2^th).
    pub fn decoherence_drift(s: f64, theta: f64) -> f64 {
        let x = PI * s / theta;
        let xcothx = if x < 1e-8 { 1.0 + x * x / 3.0 } else { x / x.tanh() };
        xcothx - 1.0 / (1.0 + s * s)
    }

    /// ln[tanh u / u] with u = πνs/(2θ) = νt/(2τ_F).
    pub fn b_th(sn: f64, theta: f64) -> f64 {
        ln_tanhc(0.5 * PI * sn / theta)
    }

    /// ln(2Ω̄τ_F).
    pub fn fidelity_saturation(theta: f64) -> f64 {
        (2.0 * theta / PI).ln()
    }
}

/// Quadrature oracle for every kernel.
pub mod quad {
    use super::*;

    fn run<G: Fn(f64) -> f64>(name: &'static str, g: G, s: f64, kind: Oscillation) -> Result<f64> {
        run_with(name, g, s, kind, TransformOptions::default()).map(|e| e.value)
    }

    pub(crate) fn run_with<G: Fn(f64) -> f64>(
        name: &'static str,
        g: G,
        s: f64,
        kind: Oscillation,
        opts: TransformOptions,
    ) -> Result<Estimate> {
        damped_transform(g, s, kind, opts).map_err(|NotConverged { error, .. }| Error::QuadratureFailure {
            integrand: name,
            s,
            error,
        })
    }

    pub fn gamma1_vac(s: f64) -> Result<f64> {
        run("gamma1_vac", |w: f64| (-w).exp() / w, s, Oscillation::OneMinusCos)
    }

    pub fn gamma1_th(s: f64, theta: f64) -> Result<f64> {
        let g = move |w: f64| (-w).exp() * coth_half_minus_one(theta * w) / w;
        run("gamma1_th", g, s, Oscillation::OneMinusCos)
    }

    pub fn gamma2_vac(s: f64) -> Result<f64> {
        run("gamma2_vac", |w: f64| (-w).exp(), s, Oscillation::Sin)
    }

    pub fn gamma2_th(s: f64, theta: f64) -> Result<f64> {
        let g = move |w: f64| (-w).exp() * coth_half_minus_one(theta * w);
        run("gamma2_th", g, s, Oscillation::Sin)
    }

    /// Thermal fidelity kernel at the Doppler-scaled time `sn = νs`.
    pub fn b_th(sn: f64, theta: f64) -> Result<f64> {
        let g = move |w: f64| (-w).exp() * tanh_half_minus_one(theta * w) / w;
        run("b_th", g, sn, Oscillation::OneMinusCos)
    }

    pub fn i3_vac(s: f64) -> Result<f64> {
        run("i3_vac", |w: f64| w * (-w).exp(), s, Oscillation::Cos)
    }

    pub fn i3_th(s: f64, theta: f64) -> Result<f64> {
        let g = move |w: f64| (-w).exp() * w * coth_half_minus_one(theta * w);
        run("i3_th", g, s, Oscillation::Cos)
    }

    /// Full coth-weighted kernel in one integral.
    pub fn decoherence(s: f64, theta: f64) -> Result<f64> {
        Ok(gamma1_vac(s)? + gamma1_th(s, theta)?)
    }

    /// Full tanh-weighted kernel in one integral.
    pub fn fidelity(sn: f64, theta: f64) -> Result<f64> {
        Ok(gamma1_vac(sn)? + b_th(sn, theta)?)
    }
}
