//! Cross-checks of every closed form against an independent evaluation.

use crate::config::RunConfig;
use crate::error::CliError;
use num_complex::Complex64;
use qed_sbs::decoherence::{gamma_exact, gamma_unexpanded};
use qed_sbs::fidelity::{
    log_b_macrofraction_exact, log_b_mode, log_b_small_patch, log_decoherence_mode, mode_displacement, FieldMode,
};
use qed_sbs::geometry::SphereQuadrature;
use qed_sbs::kernels::{self, KernelValue};
use qed_sbs::oracle::{displaced_thermal_state, displacement_overlap_trace, uhlmann_fidelity};
use qed_sbs::{MomentumVector, PhysicalScenario, Polarization, UnitDirection};
use rayon::prelude::*;
use serde::Serialize;

/// Per-mode model: log of a fidelity-like overlap for one field mode.
pub type ModeModel = fn(
    &FieldMode,
    f64,
    &MomentumVector,
    &MomentumVector,
    &PhysicalScenario,
    f64,
) -> qed_sbs::Result<f64>;

pub const KERNEL_TOLERANCE: f64 = 1e-8;
pub const MODE_TOLERANCE: f64 = 1e-6;
pub const UNEXPANDED_TOLERANCE: f64 = 5e-3;
pub const PATCH_TOLERANCE: f64 = 1e-2;

pub const KERNEL_THETAS: [f64; 4] = [10.0, 25.0, 400.0, 1e4];
pub const MODE_OCCUPATIONS: [f64; 3] = [0.0, 0.2, 1.0];
pub const MODE_DISPLACEMENTS: [f64; 3] = [0.1, 1.0, 2.0];

#[derive(Debug, Clone, Copy)]
pub struct OracleSuite {
    /// Model checked against the Uhlmann fidelity of displaced thermal states.
    pub mode_fidelity: ModeModel,
    /// Model checked against |tr[D(β1) ρ D(β2)†]|.
    pub mode_decoherence: ModeModel,
    pub tolerance_scale: f64,
}

impl Default for OracleSuite {
    fn default() -> Self {
        Self {
            mode_fidelity: log_b_mode,
            mode_decoherence: log_decoherence_mode,
            tolerance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: &'static str, discrepancies: &[f64], tolerance: f64) -> Self {
        let max_discrepancy = discrepancies.iter().fold(0.0f64, |m, &d| if d.is_nan() { f64::INFINITY } else { m.max(d) });
        Self {
            name,
            cases: discrepancies.len(),
            max_discrepancy,
            tolerance,
            passed: max_discrepancy <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<28} max discrepancy {:e} (tolerance {:e}, {} cases)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_discrepancy,
            self.tolerance,
            self.cases
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Absolute or relative discrepancy, whichever is smaller.
fn looser(k: &KernelValue) -> f64 {
    k.abs_discrepancy.min(k.rel_discrepancy())
}

pub fn kernel_discrepancies(thetas: &[f64], times: &[f64]) -> qed_sbs::Result<Vec<f64>> {
    let cases: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| times.iter().map(move |&s| (s, t))).collect();
    let per_case: qed_sbs::Result<Vec<Vec<f64>>> = cases
        .par_iter()
        .map(|&(s, theta)| {
            Ok(vec![
                looser(&kernels::gamma1_vac(s)?),
                looser(&kernels::gamma1_th(s, theta)?),
                looser(&kernels::gamma2_vac(s)?),
                looser(&kernels::gamma2_th(s, theta)?),
                looser(&kernels::b_th(s, theta, 1.0)?),
                looser(&kernels::i3_vac(s)?),
                looser(&kernels::i3_th(s, theta)?),
            ])
        })
        .collect();
    Ok(per_case?.into_iter().flatten().collect())
}

/// A probe mode with the requested thermal occupation and a weight giving
/// the requested |Δβ|.
struct ModeProbe {
    mode: FieldMode,
    weight: f64,
    nbar: f64,
    delta: Complex64,
}

const PROBE_TIME: f64 = 3.0;

fn probe_momenta() -> (MomentumVector, MomentumVector) {
    (MomentumVector::new(0.03, -0.02, 0.01), MomentumVector::new(-0.01, 0.01, 0.0))
}

fn probe(sc: &PhysicalScenario, nbar: f64, delta_abs: f64) -> qed_sbs::Result<ModeProbe> {
    let theta = sc.cutoff_over_thermal;
    // θω = 40 leaves an occupation of 4e-18, indistinguishable from vacuum
    let omega = if nbar == 0.0 { 40.0 / theta } else { (1.0 / nbar).ln_1p() / theta };
    let khat = UnitDirection::from_spherical(1.1, 0.4);
    let (p, pp) = probe_momenta();
    let mode = FieldMode {
        khat,
        omega,
        polarization: Polarization::First,
    };
    let unit = mode_displacement(&mode, PROBE_TIME, &p, &pp, sc, 0.5)?;
    let weight = 0.5 * (delta_abs / unit.norm()).powi(2);
    let delta = mode_displacement(&mode, PROBE_TIME, &p, &pp, sc, weight)?;
    Ok(ModeProbe {
        mode,
        weight,
        nbar: mode.mean_occupation(sc),
        delta,
    })
}

pub fn mode_discrepancies(suite: &OracleSuite, sc: &PhysicalScenario, truncation: usize) -> qed_sbs::Result<(Vec<f64>, Vec<f64>)> {
    let (p, pp) = probe_momenta();
    let cases: Vec<(f64, f64)> = MODE_OCCUPATIONS
        .iter()
        .flat_map(|&n| MODE_DISPLACEMENTS.iter().map(move |&d| (n, d)))
        .collect();
    let pairs: qed_sbs::Result<Vec<(f64, f64)>> = cases
        .par_iter()
        .map(|&(nbar, d)| {
            let pr = probe(sc, nbar, d)?;
            let zero = Complex64::new(0.0, 0.0);
            let rho = displaced_thermal_state(pr.nbar, zero, truncation)?;
            let sigma = displaced_thermal_state(pr.nbar, pr.delta, truncation)?;
            let oracle_b = uhlmann_fidelity(&rho, &sigma)?;
            let model_b = (suite.mode_fidelity)(&pr.mode, PROBE_TIME, &p, &pp, sc, pr.weight)?.exp();
            let oracle_d = displacement_overlap_trace(pr.nbar, pr.delta, zero, truncation)?.norm();
            let model_d = (suite.mode_decoherence)(&pr.mode, PROBE_TIME, &p, &pp, sc, pr.weight)?.exp();
            Ok(((model_b - oracle_b).abs(), (model_d - oracle_d).abs()))
        })
        .collect();
    Ok(pairs?.into_iter().unzip())
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn unexpanded_discrepancies(cfg: &RunConfig, times: &[f64]) -> qed_sbs::Result<Vec<f64>> {
    let sc = &cfg.scenario;
    let (p, pp) = (&cfg.momenta.p, &cfg.momenta.p_prime);
    let sphere = SphereQuadrature {
        rel_tol: 1e-7,
        ..Default::default()
    };
    times
        .par_iter()
        .map(|&s| {
            let exact = gamma_exact(s, p, pp, &cfg.unobserved, sc)?.gamma;
            let direct = gamma_unexpanded(s, p, pp, &cfg.unobserved, sc, &sphere)?;
            Ok(rel(exact, direct))
        })
        .collect()
}

pub fn patch_discrepancies(cfg: &RunConfig, times: &[f64]) -> qed_sbs::Result<Vec<f64>> {
    let sc = &cfg.scenario;
    let (p, pp) = (&cfg.momenta.p, &cfg.momenta.p_prime);
    times
        .par_iter()
        .map(|&s| {
            let exact = log_b_macrofraction_exact(&cfg.macrofraction, s, p, pp, sc)?.log_b;
            let small = log_b_small_patch(&cfg.macrofraction, s, p, pp, sc).log_b;
            Ok(rel(exact, small))
        })
        .collect()
}

pub fn run_suite(cfg: &RunConfig, suite: &OracleSuite) -> Result<OracleReport, CliError> {
    let scale = suite.tolerance_scale;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(CliError::Config(format!("tolerance scale must be > 0, got {scale}")));
    }
    let tau = cfg.scenario.tau_f();
    let mut thetas = KERNEL_THETAS.to_vec();
    if !thetas.contains(&cfg.scenario.cutoff_over_thermal) {
        thetas.push(cfg.scenario.cutoff_over_thermal);
    }
    let kernels = kernel_discrepancies(&thetas, &log_spaced(1e-3, 1e4, 40))?;
    let (tanh, coth) = mode_discrepancies(suite, &cfg.scenario, cfg.oracle.truncation)?;
    let unexpanded = unexpanded_discrepancies(cfg, &log_spaced(0.1, 10.0 * tau, 8))?;
    let patch = patch_discrepancies(cfg, &[0.5, 1.0, 10.0, tau, 10.0 * tau])?;
    let checks = vec![
        CheckOutcome::new("kernel_closed_vs_quadrature", &kernels, KERNEL_TOLERANCE * scale),
        CheckOutcome::new("mode_fidelity_tanh", &tanh, MODE_TOLERANCE * scale),
        CheckOutcome::new("mode_decoherence_coth", &coth, MODE_TOLERANCE * scale),
        CheckOutcome::new("gamma_vs_unexpanded_2d", &unexpanded, UNEXPANDED_TOLERANCE * scale),
        CheckOutcome::new("small_patch_vs_exact_patch", &patch, PATCH_TOLERANCE * scale),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(OracleReport { checks, passed })
}
