//! The three-row summary table with the configuration's prefactors substituted.

use crate::config::RunConfig;
use crate::error::CliError;
use qed_sbs::fidelity::doppler_factor;
use qed_sbs::geometry::AngularMoments;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prefactors {
    pub alpha_over_pi: f64,
    #[serde(rename = "F0")]
    pub f0: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    /// α ΔΩ0 (ε·Δp)² / 4π²
    pub f: f64,
    pub nu: f64,
    pub beta: f64,
    pub tau_f: f64,
}

/// A row evaluates as `a·g(s) + b` with g given by `form`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub expression: &'static str,
    pub form: &'static str,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub regime: &'static str,
    pub time_scale: &'static str,
    pub gamma: Entry,
    pub neg_log_b: Entry,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeTable {
    pub prefactors: Prefactors,
    pub rows: Vec<Row>,
}

pub fn build(cfg: &RunConfig) -> Result<RegimeTable, CliError> {
    let sc = &cfg.scenario;
    let dp = cfg.momenta.p - cfg.momenta.p_prime;
    let m = AngularMoments::compute(&cfg.unobserved, &dp)?;
    let k = sc.coupling_alpha / PI;
    let beta = sc.velocity_beta;
    let tau = sc.tau_f();
    let f = cfg.macrofraction.prefactor(&dp, sc);
    let nu = doppler_factor(&cfg.macrofraction.center, sc);
    let g = f / (nu * nu);
    let rows = vec![
        Row {
            regime: "SubCutoff",
            time_scale: "s << 1",
            gamma: Entry {
                expression: "(alpha/pi) F0 s^2/2",
                form: "s^2",
                a: k * m.f0 / 2.0,
                b: 0.0,
            },
            neg_log_b: Entry {
                expression: "f s^2/2",
                form: "s^2",
                a: f / 2.0,
                b: 0.0,
            },
        },
        Row {
            regime: "VacuumLog",
            time_scale: "1 << s << Omega_bar*tau_F",
            gamma: Entry {
                expression: "(alpha/pi) {[F0 + beta F1] ln(s) - (beta/2) F1}",
                form: "ln(s)",
                a: k * (m.f0 + beta * m.f1),
                b: -k * 0.5 * beta * m.f1,
            },
            neg_log_b: Entry {
                expression: "(f/nu^2) ln(nu s)",
                form: "ln(s)",
                a: g,
                b: g * nu.ln(),
            },
        },
        Row {
            regime: "ThermalLinear",
            time_scale: "s >> Omega_bar*tau_F",
            gamma: Entry {
                expression: "(alpha/pi) {[F0 + (beta/2) F1] s/(Omega_bar*tau_F) + [F0 + beta F1] ln(Omega_bar*tau_F)}",
                form: "s",
                a: k * (m.f0 + 0.5 * beta * m.f1) / tau,
                b: k * (m.f0 + beta * m.f1) * tau.ln(),
            },
            neg_log_b: Entry {
                expression: "(f/nu^2) ln(2 Omega_bar*tau_F)",
                form: "1",
                a: 0.0,
                b: g * (2.0 * tau).ln(),
            },
        },
    ];
    Ok(RegimeTable {
        prefactors: Prefactors {
            alpha_over_pi: k,
            f0: m.f0,
            f1: m.f1,
            f,
            nu,
            beta,
            tau_f: tau,
        },
        rows,
    })
}

pub fn render_text(t: &RegimeTable) -> String {
    let p = &t.prefactors;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "alpha/pi = {:?}  F0 = {:?}  F1 = {:?}  f = {:?}  nu = {:?}  beta = {:?}  Omega_bar*tau_F = {:?}",
        p.alpha_over_pi, p.f0, p.f1, p.f, p.nu, p.beta, p.tau_f
    );
    for r in &t.rows {
        let _ = writeln!(s, "\n[{}] {}", r.regime, r.time_scale);
        for (name, e) in [("Gamma", &r.gamma), ("-log B", &r.neg_log_b)] {
            let _ = writeln!(s, "  {name:<7} = {}", e.expression);
            let _ = writeln!(s, "  {:<7} = {:?} * {} + {:?}", "", e.a, e.form, e.b);
        }
    }
    s
}

pub fn to_json(t: &RegimeTable) -> String {
    serde_json::to_string_pretty(t).expect("table serializes")
}
