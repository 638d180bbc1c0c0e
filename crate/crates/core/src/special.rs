//! Special functions of complex argument needed by the closed-form kernels.
//!
//! All routines assume `Re z > 0`; they shift the argument upward with the
//! recurrence relations and finish with the Stirling series at `|z| >= 20`.

use num_complex::Complex64;
use std::f64::consts::PI;

const SHIFT_RADIUS: f64 = 20.0;

// B_2, B_4, ..., B_16
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

fn shift_count(z: Complex64) -> usize {
    if z.norm() >= SHIFT_RADIUS {
        0
    } else {
        (SHIFT_RADIUS - z.re).ceil().max(0.0) as usize
    }
}

/// ln Γ(z) for `Re z > 0`. Only the real part is branch-independent; the
/// imaginary part is correct modulo 2π.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    debug_assert!(z.re > 0.0);
    let n = shift_count(z);
    let mut shift = Complex64::new(0.0, 0.0);
    for k in 0..n {
        shift += (z + k as f64).ln();
    }
    let w = z + n as f64;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let m = 2.0 * (k as f64 + 1.0);
        series += pow * (b / (m * (m - 1.0)));
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift
}

/// ln Γ(x) for real `x > 0`.
pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).re
}

/// Digamma ψ(z) for `Re z > 0`.
pub fn digamma(z: Complex64) -> Complex64 {
    debug_assert!(z.re > 0.0);
    let n = shift_count(z);
    let mut shift = Complex64::new(0.0, 0.0);
    for k in 0..n {
        shift += (z + k as f64).inv();
    }
    let w = z + n as f64;
    let inv2 = (w * w).inv();
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        series += pow * (b / (2.0 * (k as f64 + 1.0)));
        pow *= inv2;
    }
    w.ln() - 0.5 / w - series - shift
}

/// Trigamma ψ'(z) for `Re z > 0`.
pub fn trigamma(z: Complex64) -> Complex64 {
    debug_assert!(z.re > 0.0);
    let n = shift_count(z);
    let mut shift = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let t = z + k as f64;
        shift += (t * t).inv();
    }
    let w = z + n as f64;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2 * inv;
    for b in BERNOULLI.iter() {
        series += pow * *b;
        pow *= inv2;
    }
    inv + 0.5 * inv2 + series + shift
}

/// 1 − cos x without cancellation near zero.
#[inline]
pub fn one_minus_cos(x: f64) -> f64 {
    let h = (0.5 * x).sin();
    2.0 * h * h
}

/// ln(sinh x / x) for x ≥ 0, overflow-safe.
pub fn ln_sinhc(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-4 {
        let x2 = x * x;
        x2 / 6.0 - x2 * x2 / 180.0
    } else if x > 30.0 {
        x - (2.0 * x).ln() + (-(-2.0 * x).exp()).ln_1p()
    } else {
        (x.sinh() / x).ln()
    }
}

/// ln(tanh x / x) for x ≥ 0; always ≤ 0.
pub fn ln_tanhc(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-4 {
        let x2 = x * x;
        -x2 / 3.0 + 7.0 * x2 * x2 / 90.0
    } else if x > 30.0 {
        -x.ln()
    } else {
        (x.tanh() / x).ln()
    }
}

/// 2/(eᵘ − 1) = coth(u/2) − 1.
#[inline]
pub fn coth_half_minus_one(u: f64) -> f64 {
    2.0 / u.exp_m1()
}

/// −2/(eᵘ + 1) = tanh(u/2) − 1.
#[inline]
pub fn tanh_half_minus_one(u: f64) -> f64 {
    -2.0 / (u.exp() + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Reference values from mpmath at 30 digits.
    #[test]
    fn ln_gamma_matches_reference() {
        assert_relative_eq!(ln_gamma_real(0.5), 0.5723649429247001, epsilon = 1e-15);
        assert_relative_eq!(ln_gamma_real(1.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(ln_gamma_real(7.25), 7.052185450738539, max_relative = 1e-14);
        let z = ln_gamma(c(1.1, 2.5));
        assert_relative_eq!(z.re, -2.4564970097256756, max_relative = 1e-14);
        let z = ln_gamma(c(0.55, 40.0));
        assert_relative_eq!(z.re, -61.72847185508843, max_relative = 1e-14);
    }

    #[test]
    fn digamma_matches_reference() {
        assert_relative_eq!(digamma(c(1.0, 0.0)).re, -0.5772156649015329, epsilon = 1e-15);
        let z = digamma(c(1.1, 2.5));
        assert_relative_eq!(z.re, 0.9385760930741149, max_relative = 1e-14);
        assert_relative_eq!(z.im, 1.3322399171441375, max_relative = 1e-14);
    }

    #[test]
    fn trigamma_matches_reference() {
        assert_relative_eq!(trigamma(c(1.0, 0.0)).re, PI * PI / 6.0, max_relative = 1e-14);
        let z = trigamma(c(1.1, 2.5));
        assert_relative_eq!(z.re, 0.09423205187246707, max_relative = 1e-13);
        assert_relative_eq!(z.im, -0.3820344296904989, max_relative = 1e-13);
    }

    #[test]
    fn recurrence_holds_across_shift_boundary() {
        for &z in &[c(0.3, 0.2), c(19.5, 0.1), c(2.0, 19.99), c(0.7, 25.0)] {
            let lhs = ln_gamma(z + 1.0).re - ln_gamma(z).re;
            assert_relative_eq!(lhs, z.norm().ln(), max_relative = 1e-13, epsilon = 1e-14);
            let d = digamma(z + 1.0) - digamma(z) - z.inv();
            assert!(d.norm() < 1e-13);
        }
    }

    #[test]
    fn hyperbolic_logs_are_continuous_across_branches() {
        for &x in &[1e-4, 30.0] {
            let (lo, hi) = (x * (1.0 - 1e-12), x * (1.0 + 1e-12));
            assert!((ln_sinhc(lo) - ln_sinhc(hi)).abs() < 1e-10);
            assert!((ln_tanhc(lo) - ln_tanhc(hi)).abs() < 1e-10);
        }
        assert_relative_eq!(ln_sinhc(1.0), 1f64.sinh().ln(), max_relative = 1e-15);
        assert_relative_eq!(ln_tanhc(1.0), -0.27234146891183155, max_relative = 1e-14);
        assert_relative_eq!(ln_sinhc(50.0), 50.0 - 100f64.ln(), max_relative = 1e-15);
    }
}
