//! One-dimensional quadrature for exponentially damped Fourier-type integrals.
//!
//! `integrate` is a globally adaptive 21-point Gauss–Kronrod scheme. The
//! semi-infinite transforms in [`damped_transform`] integrate directly for
//! `s <= 10` and switch to half-period panels with Euler summation beyond.

use crate::special::one_minus_cos;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_067_185,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Upper integration limit in cutoff units; every integrand carries e^{−ω}.
pub const OMEGA_MAX: f64 = 60.0;

/// Above this s the oscillatory panel scheme replaces plain adaptive quadrature.
pub const PANEL_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-15, rel: 1e-12 }
    }
}

impl Tolerance {
    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Returned when the requested tolerance cannot be met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotConverged {
    pub value: f64,
    pub error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    mass: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut values = [(0.0, 0.0); 10];
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx), f(center + dx));
        values[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, (f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let abs_sum = abs_sum * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * abs_sum;
    if roundoff > f64::MIN_POSITIVE {
        error = error.max(roundoff);
    }
    Segment {
        a,
        b,
        value,
        error,
        mass: abs_sum,
    }
}

/// Adaptive Gauss–Kronrod over `[points[0], points[last]]`, starting from the
/// partition given by `points`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate, NotConverged> {
    const MAX_SEGMENTS: usize = 4000;
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut mass = 0.0;
    for w in points.windows(2) {
        let seg = gk21(&f, w[0], w[1]);
        value += seg.value;
        error += seg.error;
        mass += seg.mass;
        heap.push(seg);
    }
    let mut evaluations = 21 * heap.len();
    // Below this the estimate is dominated by rounding in ∫|f|.
    let roundoff = |mass: f64| 100.0 * f64::EPSILON * mass;
    while error > tol.target(value).max(roundoff(mass)) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(NotConverged { value, error });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            return Err(NotConverged { value, error });
        }
        let (l, r) = (gk21(&f, worst.a, mid), gk21(&f, mid, worst.b));
        evaluations += 42;
        value += l.value + r.value - worst.value;
        error += l.error + r.error - worst.error;
        mass += l.mass + r.mass - worst.mass;
        heap.push(l);
        heap.push(r);
    }
    // Re-sum to shed drift from incremental updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Partition of `[a, b]` refined geometrically toward `a`, so that features
/// at any scale down to `(b − a)·2^{−levels}` are seen by the first pass.
pub fn geometric_points(a: f64, b: f64, levels: u32) -> Vec<f64> {
    let mut pts = Vec::with_capacity(levels as usize + 2);
    pts.push(a);
    for k in (0..levels).rev() {
        pts.push(a + (b - a) * 0.5f64.powi(k as i32 + 1));
    }
    pts.push(b);
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oscillation {
    /// g(ω)·(1 − cos ωs)
    OneMinusCos,
    /// g(ω)·sin ωs
    Sin,
    /// g(ω)·cos ωs
    Cos,
}

impl Oscillation {
    #[inline]
    fn weight(self, x: f64) -> f64 {
        match self {
            Oscillation::OneMinusCos => one_minus_cos(x),
            Oscillation::Sin => x.sin(),
            Oscillation::Cos => x.cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformOptions {
    pub tol: Tolerance,
    /// Number of half periods integrated directly before the panel tail.
    pub panel_offset: usize,
}

impl Default for TransformOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance::default(),
            panel_offset: 8,
        }
    }
}

/// ∫₀^∞ g(ω)·w(ωs) dω for an envelope `g` decaying at least like e^{−ω}.
pub fn damped_transform<G: Fn(f64) -> f64>(
    g: G,
    s: f64,
    kind: Oscillation,
    opts: TransformOptions,
) -> Result<Estimate, NotConverged> {
    let s = s.abs();
    if s == 0.0 {
        let value = match kind {
            Oscillation::Cos => return integrate(&g, &geometric_points(0.0, OMEGA_MAX, 40), opts.tol),
            _ => 0.0,
        };
        return Ok(Estimate {
            value,
            error: 0.0,
            evaluations: 0,
        });
    }
    let full = |w: f64| g(w) * kind.weight(w * s);
    if s <= PANEL_THRESHOLD {
        return integrate(full, &geometric_points(0.0, OMEGA_MAX, 40), opts.tol);
    }
    let phase = match kind {
        Oscillation::Sin => 0.0,
        _ => 0.5,
    };
    let start = (opts.panel_offset as f64 + phase) * PI / s;
    let head = integrate(&full, &geometric_points(0.0, start, 40), opts.tol)?;
    let mut total = head;
    if kind == Oscillation::OneMinusCos {
        let flat = integrate(&g, &geometric_points(start, OMEGA_MAX.max(2.0 * start), 30), opts.tol)?;
        let tail = fourier_tail(&g, s, start, Oscillation::Cos, opts.tol)?;
        total.value += flat.value - tail.value;
        total.error += flat.error + tail.error;
        total.evaluations += flat.evaluations + tail.evaluations;
    } else {
        let tail = fourier_tail(&g, s, start, kind, opts.tol)?;
        total.value += tail.value;
        total.error += tail.error;
        total.evaluations += tail.evaluations;
    }
    Ok(total)
}

/// Euler–van Wijngaarden estimate from a window of partial sums: repeated
/// averaging of neighbours.
fn euler_average(partial: &[f64]) -> f64 {
    let mut row = partial.to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row[0]
}

/// ∫_start^∞ g(ω)·w(ωs) dω where `start` is a zero of the oscillating factor.
pub fn fourier_tail<G: Fn(f64) -> f64>(
    g: &G,
    s: f64,
    start: f64,
    kind: Oscillation,
    tol: Tolerance,
) -> Result<Estimate, NotConverged> {
    const MAX_PANELS: usize = 2000;
    const MIN_TERMS: usize = 24;
    const WINDOW: usize = 20;
    let h = PI / s;
    let f = |w: f64| g(w) * kind.weight(w * s);
    let panel_tol = Tolerance {
        abs: tol.abs * 1e-2,
        rel: tol.rel,
    };
    let mut partial: Vec<f64> = Vec::new();
    let mut sum = 0.0;
    let mut quad_error = 0.0;
    let mut evaluations = 0;
    let mut scale: f64 = 0.0;
    for k in 0..MAX_PANELS {
        let a = start + k as f64 * h;
        if a >= OMEGA_MAX {
            return Ok(Estimate {
                value: sum,
                error: quad_error,
                evaluations,
            });
        }
        let est = integrate(f, &[a, a + h], panel_tol)?;
        evaluations += est.evaluations;
        quad_error += est.error;
        sum += est.value;
        scale = scale.max(est.value.abs());
        partial.push(sum);
        let n = partial.len();
        // Negligible terms: the direct sum has converged.
        if n >= 4
            && partial[n - 4..]
                .windows(2)
                .all(|w| (w[1] - w[0]).abs() <= tol.target(sum) * 1e-3 || w[1] == w[0])
            && est.value.abs() <= 1e-3 * scale.max(f64::MIN_POSITIVE)
        {
            return Ok(Estimate {
                value: sum,
                error: quad_error,
                evaluations,
            });
        }
        if n >= MIN_TERMS + WINDOW && n % 4 == 0 {
            let e1 = euler_average(&partial[n - WINDOW..]);
            let e2 = euler_average(&partial[n - WINDOW - 1..n - 1]);
            let diff = (e1 - e2).abs();
            if diff <= tol.target(e1) {
                return Ok(Estimate {
                    value: e1,
                    error: diff + quad_error,
                    evaluations,
                });
            }
        }
    }
    Err(NotConverged {
        value: sum,
        error: f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| x.powi(5) - 3.0 * x, &[0.0, 2.0], Tolerance::default()).unwrap();
        assert_relative_eq!(est.value, 64.0 / 6.0 - 6.0, max_relative = 1e-14);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let est = integrate(|x: f64| x.sqrt().recip(), &geometric_points(0.0, 1.0, 30), Tolerance::default());
        assert_relative_eq!(est.unwrap().value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn laplace_transforms_of_sin_and_cos() {
        for &s in &[0.5, 3.0, 12.0, 250.0, 1e4] {
            let opts = TransformOptions::default();
            let sin = damped_transform(|w: f64| (-w).exp(), s, Oscillation::Sin, opts).unwrap();
            assert_relative_eq!(sin.value, s / (1.0 + s * s), max_relative = 1e-11);
            let cos = damped_transform(|w: f64| (-w).exp(), s, Oscillation::Cos, opts).unwrap();
            assert_relative_eq!(cos.value, 1.0 / (1.0 + s * s), max_relative = 1e-10);
        }
    }

    #[test]
    fn frullani_type_integral() {
        // ∫ e^{−ω}(1 − cos ωs)/ω dω = ½ ln(1 + s²)
        for &s in &[1e-3, 1.0, 10.0, 10.5, 1e3, 1e4] {
            let est = damped_transform(
                |w: f64| (-w).exp() / w,
                s,
                Oscillation::OneMinusCos,
                TransformOptions::default(),
            )
            .unwrap();
            assert_relative_eq!(est.value, 0.5 * (s * s).ln_1p(), max_relative = 1e-11);
        }
    }

    #[test]
    fn panel_offset_does_not_change_result() {
        let g = |w: f64| (-w).exp() / w;
        for &s in &[20.0, 777.0, 1e4] {
            let a = TransformOptions { panel_offset: 4, ..Default::default() };
            let b = TransformOptions { panel_offset: 11, ..Default::default() };
            let va = damped_transform(g, s, Oscillation::OneMinusCos, a).unwrap().value;
            let vb = damped_transform(g, s, Oscillation::OneMinusCos, b).unwrap().value;
            assert!((va - vb).abs() < 1e-9, "s = {s}: {va} vs {vb}");
        }
    }

    #[test]
    fn euler_average_sums_alternating_harmonic() {
        let mut partial = Vec::new();
        let mut sum = 0.0;
        for k in 0..40 {
            sum += if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64 + 1.0);
            partial.push(sum);
        }
        assert_relative_eq!(euler_average(&partial[20..]), 2f64.ln(), max_relative = 1e-12);
    }
}
