//! Time sweeps of Γ and −log B: the two traces of the reference figure.

use crate::config::RunConfig;
use crate::error::CliError;
use qed_sbs::decoherence::{dipole_validity_time, gamma_from_moments, gamma_regime_from_moments};
use qed_sbs::fidelity::{fidelity_regime, log_b_floor, log_b_macrofraction_exact, log_b_small_patch};
use qed_sbs::geometry::AngularMoments;
use qed_sbs::Regime;
use rayon::prelude::*;
use std::io::Write;

pub const HEADER: [&str; 11] = [
    "s [Omega_bar*t]",
    "gamma_exact [1]",
    "gamma_regime [1]",
    "gamma_regime_label",
    "gamma_near_boundary",
    "neg_log_b_exact [1]",
    "neg_log_b_small_patch [1]",
    "neg_log_b_regime [1]",
    "fidelity_regime_label",
    "fidelity_near_boundary",
    "neg_log_b_floor [1]",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub s: f64,
    pub gamma_exact: f64,
    pub gamma_regime: f64,
    pub gamma_label: Regime,
    pub gamma_near_boundary: bool,
    pub neg_log_b_exact: f64,
    pub neg_log_b_small_patch: f64,
    pub neg_log_b_regime: f64,
    pub fidelity_label: Regime,
    pub fidelity_near_boundary: bool,
    pub neg_log_b_floor: f64,
}

/// −x without producing a negative zero.
fn negate(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -x
    }
}

pub fn compute(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let sc = &cfg.scenario;
    let (p, pp) = (&cfg.momenta.p, &cfg.momenta.p_prime);
    let mac = &cfg.macrofraction;
    let moments = AngularMoments::compute(&cfg.unobserved, &(p - pp))?;
    let floor = negate(log_b_floor(mac, p, pp, sc));
    let rows: qed_sbs::Result<Vec<SweepRow>> = cfg
        .time_grid
        .values()
        .into_par_iter()
        .map(|s| {
            let regime = gamma_regime_from_moments(s, &moments, sc);
            let fid_regime = fidelity_regime(mac, s, p, pp, sc);
            Ok(SweepRow {
                s,
                gamma_exact: gamma_from_moments(s, &moments, sc),
                gamma_regime: regime.gamma,
                gamma_label: regime.regime_label,
                gamma_near_boundary: regime.near_boundary,
                neg_log_b_exact: negate(log_b_macrofraction_exact(mac, s, p, pp, sc)?.log_b),
                neg_log_b_small_patch: negate(log_b_small_patch(mac, s, p, pp, sc).log_b),
                neg_log_b_regime: negate(fid_regime.log_b),
                fidelity_label: fid_regime.regime_label,
                fidelity_near_boundary: fid_regime.near_boundary,
                neg_log_b_floor: floor,
            })
        })
        .collect();
    Ok(rows?)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            format!("{:?}", r.s),
            format!("{:?}", r.gamma_exact),
            format!("{:?}", r.gamma_regime),
            r.gamma_label.to_string(),
            r.gamma_near_boundary.to_string(),
            format!("{:?}", r.neg_log_b_exact),
            format!("{:?}", r.neg_log_b_small_patch),
            format!("{:?}", r.neg_log_b_regime),
            r.fidelity_label.to_string(),
            r.fidelity_near_boundary.to_string(),
            format!("{:?}", r.neg_log_b_floor),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Prints a warning when the grid runs past the moving-dipole validity time.
pub fn warn_dipole_validity(cfg: &RunConfig) -> bool {
    let tau_dip = dipole_validity_time(&cfg.scenario);
    let beyond = cfg.time_grid.s_max > tau_dip;
    if beyond {
        eprintln!(
            "WARNING: s_max = {} exceeds the dipole validity time Omega_bar*tau_dip = {tau_dip}",
            cfg.time_grid.s_max
        );
    }
    beyond
}

pub fn run<W: Write>(cfg: &RunConfig, out: W) -> Result<usize, CliError> {
    warn_dipole_validity(cfg);
    let rows = compute(cfg)?;
    write_csv(&rows, out)?;
    Ok(rows.len())
}
