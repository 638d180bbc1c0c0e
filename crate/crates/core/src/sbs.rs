//! Spectrum-broadcast-structure diagnostics over a discretized momentum
//! distribution and a tiling of the observed sky into macrofractions.

use crate::decoherence::gamma_from_moments;
use crate::fidelity::{log_b_floor, log_b_small_patch, Macrofraction};
use crate::geometry::{moment_tensor, patch_half_angle, AngularMoments, AngularWeight, Polarization, SolidAngleRegion, UnitDirection};
use crate::model::{MomentumVector, PhysicalScenario};
use crate::{Error, Result};
use nalgebra::{Matrix3, OMatrix, Vector3, U3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Squared determinant of a polarization triple below which it spans no volume.
pub const GRAM_DETERMINANT_MIN: f64 = 1e-10;

/// Cell centers p_Δ with probabilities |⟨p_Δ|ψ⟩|² summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub cells: Vec<MomentumVector>,
    pub weights: Vec<f64>,
}

impl MomentumGrid {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Σ w (p − p̄)_i (p − p̄)_j
    pub fn covariance(&self) -> Matrix3<f64> {
        let mean: MomentumVector = self.cells.iter().zip(&self.weights).map(|(c, w)| *w * c).sum();
        self.cells
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| {
                let d = c - mean;
                *w * d * d.transpose()
            })
            .sum()
    }
}

/// Isotropic Gaussian of width `spread` sampled at the centers of a cubic
/// grid spanning ±4 spreads around `mean_p`.
pub fn pointer_probabilities(mean_p: &MomentumVector, spread: f64, cells_per_axis: usize) -> Result<MomentumGrid> {
    if cells_per_axis < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 cells per axis, got {cells_per_axis}")));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::InvalidParameter(format!("spread must be > 0, got {spread}")));
    }
    let n = cells_per_axis;
    let h = 8.0 * spread / n as f64;
    let offset = |i: usize| -4.0 * spread + (i as f64 + 0.5) * h;
    let mut cells = Vec::with_capacity(n * n * n);
    let mut weights = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = Vector3::new(offset(i), offset(j), offset(k));
                cells.push(mean_p + d);
                weights.push((-d.norm_squared() / (2.0 * spread * spread)).exp());
            }
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(MomentumGrid { cells, weights })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tiling {
    pub macrofractions: Vec<Macrofraction>,
    pub unobserved: SolidAngleRegion,
}

impl Tiling {
    /// Patches with distinct centers must not overlap, and no patch may reach
    /// into the unobserved region. A patch may carry both polarizations.
    pub fn validate(&self) -> Result<()> {
        self.unobserved.validate()?;
        let ms = &self.macrofractions;
        for (i, a) in ms.iter().enumerate() {
            a.validate()?;
            let ra = patch_half_angle(a.solid_angle);
            for b in &ms[..i] {
                let same_patch = a.center.angle_to(&b.center) < 1e-12 && (a.solid_angle - b.solid_angle).abs() < 1e-12;
                if same_patch {
                    if a.polarization == b.polarization {
                        return Err(Error::InvalidParameter("duplicate macrofraction in tiling".into()));
                    }
                    continue;
                }
                if a.center.angle_to(&b.center) < ra + patch_half_angle(b.solid_angle) - 1e-12 {
                    return Err(Error::InvalidParameter("tiling patches overlap".into()));
                }
            }
            if rim(&a.center, ra).iter().chain([&a.center]).any(|k| self.unobserved.contains(k)) {
                return Err(Error::InvalidParameter("a tiling patch reaches into the unobserved region".into()));
            }
        }
        Ok(())
    }

    /// `n` equal patches on a Fibonacci lattice over θ ∈ (θ_b, π], the
    /// complement of the cap θ ≤ θ_b about v̂0. Each patch carries one or
    /// both polarizations.
    pub fn fibonacci_band(theta_boundary: f64, n: usize, both_polarizations: bool) -> Result<Self> {
        if n == 0 || !(0.0..PI).contains(&theta_boundary) {
            return Err(Error::InvalidParameter("fibonacci_band needs n >= 1 and θ_b in [0, π)".into()));
        }
        let golden = PI * (3.0 - 5f64.sqrt());
        let z_top = theta_boundary.cos();
        let dz = (z_top + 1.0) / n as f64;
        let centers: Vec<UnitDirection> = (0..n)
            .map(|i| {
                let z: f64 = z_top - (i as f64 + 0.5) * dz;
                UnitDirection::from_spherical(z.clamp(-1.0, 1.0).acos(), (i as f64 * golden).rem_euclid(2.0 * PI))
            })
            .collect();
        let mut radius = f64::INFINITY;
        for (i, a) in centers.iter().enumerate() {
            radius = radius.min(a.theta() - theta_boundary);
            for b in &centers[..i] {
                radius = radius.min(0.5 * a.angle_to(b));
            }
        }
        let radius = 0.95 * radius.min(PI / 2.0);
        let solid_angle = 2.0 * PI * (1.0 - radius.cos());
        let pols: &[Polarization] = if both_polarizations {
            &[Polarization::First, Polarization::Second]
        } else {
            &[Polarization::First]
        };
        let mut macrofractions = Vec::with_capacity(n * pols.len());
        for c in &centers {
            for &j in pols {
                macrofractions.push(Macrofraction {
                    center: *c,
                    solid_angle,
                    polarization: j,
                });
            }
        }
        let tiling = Self {
            macrofractions,
            unobserved: SolidAngleRegion::cap(theta_boundary),
        };
        tiling.validate()?;
        Ok(tiling)
    }
}

fn rim(center: &UnitDirection, radius: f64) -> Vec<UnitDirection> {
    let basis = crate::geometry::polarization_basis(center);
    let (c, s) = (radius.cos(), radius.sin());
    (0..16)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / 16.0;
            let v = c * center.as_vector() + s * (phi.cos() * basis.e1.as_vector() + phi.sin() * basis.e2.as_vector());
            UnitDirection::from_vector(v).expect("unit by construction")
        })
        .collect()
}

/// Greedy disjoint triples (lexicographic in macrofraction index) whose
/// polarization vectors are linearly independent.
pub fn redundancy_triples(tiling: &Tiling) -> Vec<[usize; 3]> {
    let eps: Vec<Vector3<f64>> = tiling
        .macrofractions
        .iter()
        .map(|m| *m.polarization_vector().as_vector())
        .collect();
    let n = eps.len();
    let mut used = vec![false; n];
    let mut triples = Vec::new();
    for i in 0..n {
        if used[i] {
            continue;
        }
        'search: for j in i + 1..n {
            if used[j] {
                continue;
            }
            for k in j + 1..n {
                if used[k] {
                    continue;
                }
                if frame_volume2(&eps[i], &eps[j], &eps[k]) > GRAM_DETERMINANT_MIN {
                    used[i] = true;
                    used[j] = true;
                    used[k] = true;
                    triples.push([i, j, k]);
                    break 'search;
                }
            }
        }
    }
    triples
}

pub fn redundancy_count(tiling: &Tiling) -> usize {
    redundancy_triples(tiling).len()
}

/// det(EᵀE) = det(E)² for three vectors.
pub fn frame_volume2(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let d = a.dot(&b.cross(c));
    d * d
}

/// Solves ε_r·p = v_r for p (least squares beyond three components).
pub fn reconstruct_momentum(components: &[(UnitDirection, f64)]) -> Result<MomentumVector> {
    if components.len() < 3 {
        return Err(Error::DegenerateFrame(0.0));
    }
    let m = components.len();
    let e = OMatrix::<f64, nalgebra::Dyn, U3>::from_fn(m, |r, c| components[r].0.as_vector()[c]);
    let v = nalgebra::DVector::from_iterator(m, components.iter().map(|c| c.1));
    let gram = e.transpose() * &e;
    let det = gram.determinant();
    if det <= GRAM_DETERMINANT_MIN {
        return Err(Error::DegenerateFrame(det));
    }
    let svd = e.svd(true, true);
    let p = svd.solve(&v, 0.0).map_err(|_| Error::DegenerateFrame(det))?;
    Ok(MomentumVector::new(p[0], p[1], p[2]))
}

/// Decision thresholds for declaring approach to an SBS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbsThresholds {
    pub offdiag: f64,
    pub fidelity: f64,
    /// Allowed ratio max_fidelity / floor_estimate.
    pub floor_factor: f64,
}

impl Default for SbsThresholds {
    fn default() -> Self {
        Self {
            offdiag: 1e-2,
            fidelity: 1e-2,
            floor_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbsReport {
    pub s: f64,
    /// max over distinct cell pairs of e^{−Γ}
    pub max_offdiag_modulus: f64,
    /// max over macrofractions and distinguishable cell pairs of B
    pub max_fidelity: f64,
    /// max over the same of B_∞
    pub floor_estimate: f64,
    pub redundancy_triples: usize,
    /// max over redundancy triples and distinct cell pairs of the product of
    /// the three fidelities; None without triples
    pub max_triple_fidelity: Option<f64>,
    pub sbs_proximity: bool,
}

/// Quantized key and representative for a momentum difference, equal for ±Δp.
fn canonical_difference(d: &MomentumVector, quantum: f64) -> ([i64; 3], MomentumVector) {
    let q = [
        (d.x / quantum).round() as i64,
        (d.y / quantum).round() as i64,
        (d.z / quantum).round() as i64,
    ];
    let neg = [-q[0], -q[1], -q[2]];
    if q >= neg {
        (q, *d)
    } else {
        (neg, -d)
    }
}

/// Precomputed pair structure of a grid against a tiling.
#[derive(Debug, Clone)]
pub struct SbsAnalyzer {
    scenario: PhysicalScenario,
    tiling: Tiling,
    /// Unique nonzero cell differences up to sign.
    differences: Vec<MomentumVector>,
    moments: Vec<AngularMoments>,
    triples: Vec<[usize; 3]>,
    /// |ε·Δp| at or below this counts as invisible to a macrofraction.
    invisible: f64,
}

impl SbsAnalyzer {
    pub fn new(grid: &MomentumGrid, tiling: &Tiling, sc: &PhysicalScenario) -> Result<Self> {
        tiling.validate()?;
        let scale = grid.cells.iter().fold(0.0f64, |m, c| m.max(c.amax())).max(f64::MIN_POSITIVE);
        let quantum = 1e-12 * scale;
        let mut unique: BTreeMap<[i64; 3], MomentumVector> = BTreeMap::new();
        for (i, a) in grid.cells.iter().enumerate() {
            for b in &grid.cells[..i] {
                let (key, d) = canonical_difference(&(a - b), quantum);
                if key != [0, 0, 0] {
                    unique.entry(key).or_insert(d);
                }
            }
        }
        let differences: Vec<MomentumVector> = unique.into_values().collect();
        let m0 = moment_tensor(&tiling.unobserved, AngularWeight::One)?;
        let m1 = moment_tensor(&tiling.unobserved, AngularWeight::CosTheta)?;
        let moments = differences
            .iter()
            .map(|d| AngularMoments {
                f0: d.dot(&(m0 * d)),
                f1: 2.0 * d.dot(&(m1 * d)),
                f2: 0.0,
            })
            .collect();
        Ok(Self {
            scenario: *sc,
            tiling: tiling.clone(),
            differences,
            moments,
            triples: redundancy_triples(tiling),
            invisible: 1e-9 * scale,
        })
    }

    pub fn difference_count(&self) -> usize {
        self.differences.len()
    }

    pub fn redundancy_triples(&self) -> &[[usize; 3]] {
        &self.triples
    }

    fn visible(&self, mac: &Macrofraction, d: &MomentumVector) -> bool {
        mac.polarization_vector().as_vector().dot(d).abs() > self.invisible
    }

    pub fn report(&self, s: f64, thresholds: &SbsThresholds) -> SbsReport {
        let sc = &self.scenario;
        let zero = MomentumVector::zeros();
        let min_gamma = self
            .moments
            .iter()
            .map(|m| gamma_from_moments(s, m, sc))
            .fold(f64::INFINITY, f64::min);
        let max_offdiag_modulus = if min_gamma.is_finite() { (-min_gamma).exp() } else { 1.0 };

        // log B is quadratic in ε·Δp, so one kernel evaluation per patch suffices
        let macs = &self.tiling.macrofractions;
        let unit: &[(f64, f64)] = &macs
            .iter()
            .map(|mac| {
                let e = *mac.polarization_vector().as_vector();
                (log_b_small_patch(mac, s, &e, &zero, sc).log_b, log_b_floor(mac, &e, &zero, sc))
            })
            .collect::<Vec<_>>();
        let projection = &|i: usize, d: &MomentumVector| macs[i].polarization_vector().as_vector().dot(d);

        let mut max_log_b = f64::NEG_INFINITY;
        let mut max_log_floor = f64::NEG_INFINITY;
        for (i, mac) in macs.iter().enumerate() {
            for d in self.differences.iter().filter(|d| self.visible(mac, d)) {
                let e2 = projection(i, d).powi(2);
                max_log_b = max_log_b.max(unit[i].0 * e2);
                max_log_floor = max_log_floor.max(unit[i].1 * e2);
            }
        }
        // with nothing distinguishable every macrofraction is blind: B = 1
        let max_fidelity = if max_log_b.is_finite() { max_log_b.exp() } else { 1.0 };
        let floor_estimate = if max_log_floor.is_finite() { max_log_floor.exp() } else { 1.0 };

        let max_triple_fidelity = if self.triples.is_empty() {
            None
        } else {
            let worst = self
                .triples
                .iter()
                .flat_map(|t| {
                    self.differences
                        .iter()
                        .map(move |d| t.iter().map(|&i| unit[i].0 * projection(i, d).powi(2)).sum::<f64>())
                })
                .fold(f64::NEG_INFINITY, f64::max);
            Some(if worst.is_finite() { worst.exp() } else { 1.0 })
        };

        let sbs_proximity = max_offdiag_modulus < thresholds.offdiag
            && max_fidelity < thresholds.fidelity
            && max_fidelity <= thresholds.floor_factor * floor_estimate;
        SbsReport {
            s,
            max_offdiag_modulus,
            max_fidelity,
            floor_estimate,
            redundancy_triples: self.triples.len(),
            max_triple_fidelity,
            sbs_proximity,
        }
    }
}

pub fn sbs_report(grid: &MomentumGrid, tiling: &Tiling, s: f64, sc: &PhysicalScenario) -> Result<SbsReport> {
    Ok(SbsAnalyzer::new(grid, tiling, sc)?.report(s, &SbsThresholds::default()))
}
