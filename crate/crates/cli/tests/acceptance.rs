//! Runs every acceptance criterion and prints one PASS/FAIL line each.

use qed_sbs::decoherence::{gamma_exact, gamma_from_moments, gamma_relativistic_correction, gamma_unexpanded, regime_row};
use qed_sbs::fidelity::{
    doppler_factor, fidelity_row, log_b_floor, log_b_macrofraction_exact, log_b_region, log_b_small_patch,
};
use qed_sbs::geometry::{polarization_basis, AngularMoments, SphereQuadrature};
use qed_sbs::sbs::reconstruct_momentum;
use qed_sbs::{Error, MomentumVector, Polarization, Regime, SolidAngleRegion, UnitDirection};
use qed_sbs_cli::oracle_check::{kernel_discrepancies, log_spaced, mode_discrepancies, OracleSuite, KERNEL_THETAS};
use qed_sbs_cli::Preset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x) })
}

fn within(what: &str, worst: f64, limit: f64) -> Outcome {
    let msg = format!("{what}: worst {worst:.3e} (limit {limit:.1e})");
    if worst < limit {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let note = |m: String| format!("{m}; {:.2} s (limit {} s)", took.as_secs_f64(), limit.as_secs());
    match out {
        Ok(m) if took <= limit => Ok(note(m)),
        Ok(m) | Err(m) => Err(note(m)),
    }
}

fn random_direction(rng: &mut ChaCha8Rng) -> UnitDirection {
    UnitDirection::from_spherical(rng.gen::<f64>().mul_add(2.0, -1.0).acos(), 2.0 * PI * rng.gen::<f64>())
}

fn random_momentum(rng: &mut ChaCha8Rng, radius: f64) -> MomentumVector {
    *random_direction(rng).as_vector() * (radius * rng.gen::<f64>())
}

fn kernels() -> Outcome {
    timed(Duration::from_secs(10), || {
        let d = kernel_discrepancies(&KERNEL_THETAS, &log_spaced(1e-3, 1e4, 40)).map_err(|e| e.to_string())?;
        within("closed kernels vs quadrature", max_of(d), 1e-8)
    })
}

fn unexpanded() -> Outcome {
    timed(Duration::from_secs(60), || {
        let sphere = SphereQuadrature {
            rel_tol: 1e-7,
            ..Default::default()
        };
        let mut worst = 0.0f64;
        for preset in [Preset::Fig2A, Preset::Fig2B] {
            let mut cfg = preset.config();
            for beta in [0.0, 0.02, 0.05] {
                cfg.scenario.velocity_beta = beta;
                let sc = &cfg.scenario;
                let (p, pp) = (&cfg.momenta.p, &cfg.momenta.p_prime);
                for s in log_spaced(0.1, 10.0 * sc.tau_f(), 10) {
                    let exact = gamma_exact(s, p, pp, &cfg.unobserved, sc).map_err(|e| e.to_string())?.gamma;
                    let direct = gamma_unexpanded(s, p, pp, &cfg.unobserved, sc, &sphere).map_err(|e| e.to_string())?;
                    worst = worst.max(rel(exact, direct));
                }
            }
        }
        within("gamma_exact vs unexpanded 2D integral", worst, 5e-3)
    })
}

fn regime_table() -> Outcome {
    let mut cfg = Preset::Fig2A.config();
    cfg.scenario.cutoff_over_thermal = 1e4;
    let sc = &cfg.scenario;
    let (p, pp) = (&cfg.momenta.p, &cfg.momenta.p_prime);
    let mac = &cfg.macrofraction;
    let m = AngularMoments::compute(&cfg.unobserved, &(p - pp)).map_err(|e| e.to_string())?;
    let f = mac.prefactor(&(p - pp), sc);
    let nu = doppler_factor(&mac.center, sc);
    let points = [
        (Regime::SubCutoff, 1e-2),
        (Regime::VacuumLog, 1e2),
        (Regime::ThermalLinear, 100.0 * sc.tau_f()),
    ];
    let mut worst_gamma = 0.0f64;
    let mut worst_b = 0.0f64;
    for (regime, s) in points {
        worst_gamma = worst_gamma.max(rel(regime_row(regime, s, &m, sc), gamma_from_moments(s, &m, sc)));
        let exact = -log_b_macrofraction_exact(mac, s, p, pp, sc).map_err(|e| e.to_string())?.log_b;
        let patch = -log_b_small_patch(mac, s, p, pp, sc).log_b;
        let row = fidelity_row(regime, s, f, nu, sc);
        worst_b = worst_b.max(rel(row, exact)).max(rel(row, patch));
    }
    within("three Gamma rows", worst_gamma, 0.05)
        .and_then(|g| within("three -log B rows", worst_b, 0.05).map(|b| format!("{g}; {b}")))
}

fn per_mode() -> Outcome {
    timed(Duration::from_secs(30), || {
        let sc = Preset::Fig2A.config().scenario;
        let (tanh, coth) = mode_discrepancies(&OracleSuite::default(), &sc, 60).map_err(|e| e.to_string())?;
        within("Uhlmann vs tanh", max_of(tanh), 1e-6)
            .and_then(|a| within("overlap trace vs coth", max_of(coth), 1e-6).map(|b| format!("{a}; {b}")))
    })
}

fn saturation() -> Outcome {
    let cfg = Preset::Fig2B.config();
    let sc = &cfg.scenario;
    let (p, pp) = (&cfg.momenta.p, &cfg.momenta.p_prime);
    let tau = sc.tau_f();
    let neg_log_b = |s: f64| log_b_macrofraction_exact(&cfg.macrofraction, s, p, pp, sc).map(|r| -r.log_b);
    let gamma = |s: f64| gamma_exact(s, p, pp, &cfg.unobserved, sc).map(|r| r.gamma);
    let (b10, b20) = (neg_log_b(10.0 * tau).map_err(|e| e.to_string())?, neg_log_b(20.0 * tau).map_err(|e| e.to_string())?);
    let (g10, g20) = (gamma(10.0 * tau).map_err(|e| e.to_string())?, gamma(20.0 * tau).map_err(|e| e.to_string())?);
    let growth = g20 / g10 - 1.0;
    let msg = format!("-log B change {:.3e} (limit 1e-2), Gamma growth {:.1}% (needs > 50%)", rel(b10, b20), 100.0 * growth);
    if rel(b10, b20) < 0.01 && growth > 0.5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn floor_scaling() -> Outcome {
    let base = Preset::Fig2A.config();
    let (p, pp) = (&base.momenta.p, &base.momenta.p_prime);
    let pts: Vec<(f64, f64)> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&theta| {
            let mut sc = base.scenario;
            sc.cutoff_over_thermal = theta;
            (sc.tau_f().ln(), log_b_floor(&base.macrofraction, p, pp, &sc))
        })
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|q| q.0).sum::<f64>() / n, pts.iter().map(|q| q.1).sum::<f64>() / n);
    let slope = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum::<f64>() / pts.iter().map(|q| (q.0 - mx).powi(2)).sum::<f64>();
    let sc = &base.scenario;
    let nu = doppler_factor(&base.macrofraction.center, sc);
    let expected = -base.macrofraction.prefactor(&(p - pp), sc) / (nu * nu);
    within(&format!("fitted slope {slope:.6} vs {expected:.6}"), rel(slope, expected), 0.02)
}

fn geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let full = SolidAngleRegion::FullSphere;
    let mut f1 = 0.0f64;
    for _ in 0..100 {
        let dp = random_momentum(&mut rng, 0.1);
        f1 = f1.max(AngularMoments::compute(&full, &dp).map_err(|e| e.to_string())?.f1.abs());
    }
    let mut completeness = 0.0f64;
    for _ in 0..1000 {
        let k = random_direction(&mut rng);
        let pb = polarization_basis(&k);
        let sum = pb.e1.as_vector() * pb.e1.as_vector().transpose()
            + pb.e2.as_vector() * pb.e2.as_vector().transpose()
            + k.as_vector() * k.as_vector().transpose();
        completeness = completeness.max((sum - nalgebra::Matrix3::identity()).amax());
    }
    let cfg = Preset::Fig2B.config();
    let sc = &cfg.scenario;
    let (p, pp) = (&cfg.momenta.p, &cfg.momenta.p_prime);
    let cap = SolidAngleRegion::cap(PI / 4.0);
    let rest = cap.clone().complement();
    let mut additivity = 0.0f64;
    for s in [0.3, 5.0, 200.0] {
        let g = |r: &SolidAngleRegion| gamma_exact(s, p, pp, r, sc).map(|x| x.gamma).map_err(|e| e.to_string());
        additivity = additivity.max(rel(g(&cap)? + g(&rest)?, g(&full)?));
    }
    let sphere = SphereQuadrature {
        rel_tol: 1e-12,
        ..Default::default()
    };
    let half = |a: f64, b: f64| SolidAngleRegion::PolarCap {
        theta_min: a,
        theta_max: b,
        phi_min: 0.0,
        phi_max: 2.0 * PI,
    };
    for s in [0.3, 5.0, 200.0] {
        let lb = |r: &SolidAngleRegion| {
            log_b_region(r, Polarization::First, s, p, pp, sc, &sphere).map_err(|e| e.to_string())
        };
        additivity = additivity.max(rel(lb(&half(0.0, 0.2))? + lb(&half(0.2, 0.5))?, lb(&half(0.0, 0.5))?));
    }
    within("F1 on full sphere", f1, 1e-12)
        .and_then(|a| within("completeness", completeness, 1e-12).map(|b| format!("{a}; {b}")))
        .and_then(|a| within("region additivity", additivity, 1e-9).map(|b| format!("{a}; {b}")))
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut trials = 0;
    while trials < 1000 {
        let frame = [random_direction(&mut rng), random_direction(&mut rng), random_direction(&mut rng)];
        let v = frame.map(|d| *d.as_vector());
        let det = v[0].dot(&v[1].cross(&v[2]));
        if det * det < 1e-2 {
            continue;
        }
        let p = random_momentum(&mut rng, 0.1);
        let comps: Vec<_> = frame.iter().map(|d| (*d, d.as_vector().dot(&p))).collect();
        let got = reconstruct_momentum(&comps).map_err(|e| e.to_string())?;
        worst = worst.max((got - p).amax());
        trials += 1;
    }
    let d = random_direction(&mut rng);
    let minus = UnitDirection::from_vector(-d.as_vector()).map_err(|e| e.to_string())?;
    let antipodal = reconstruct_momentum(&[(d, 0.1), (minus, -0.1), (UnitDirection::z(), 0.0)]);
    if !matches!(antipodal, Err(Error::DegenerateFrame(_))) {
        return Err(format!("antipodal frame not rejected: {antipodal:?}"));
    }
    within("round trip over 1000 frames, antipodal frame rejected", worst, 1e-12)
}

fn relativistic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for preset in [Preset::Fig2A, Preset::Fig2B] {
        let cfg = preset.config();
        let sc = &cfg.scenario;
        let mut pairs = vec![(cfg.momenta.p, cfg.momenta.p_prime)];
        while pairs.len() < 20 {
            let (p, pp) = (random_momentum(&mut rng, 0.05), random_momentum(&mut rng, 0.05));
            if (p - pp).norm() <= 0.05 {
                pairs.push((p, pp));
            }
        }
        for (p, pp) in &pairs {
            for s in cfg.time_grid.values() {
                let g1 = gamma_exact(s, p, pp, &cfg.unobserved, sc).map_err(|e| e.to_string())?.gamma;
                let dg = gamma_relativistic_correction(s, p, pp, &cfg.unobserved, sc).map_err(|e| e.to_string())?;
                worst = worst.max(dg.abs() / g1);
            }
        }
    }
    within("|Gamma2 - Gamma1|/Gamma1", worst, 10.0 * 0.05f64.powi(2))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_qed-sbs"))
            .args(["sweep", "--preset", "fig2-a", "--out"])
            .arg(&out)
            .stderr(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("sweep exited with {status}"));
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let (a, b) = (run("a.csv")?, run("b.csv")?);
    if a == b && !a.is_empty() {
        Ok(format!("two sweeps byte-identical ({} bytes)", a.len()))
    } else {
        Err("sweep outputs differ".into())
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("kernel oracle equivalence", kernels),
        ("gamma vs unexpanded integral", unexpanded),
        ("regime-table fidelity", regime_table),
        ("per-mode Fock oracle", per_mode),
        ("fidelity saturation", saturation),
        ("floor scaling", floor_scaling),
        ("geometry identities", geometry),
        ("SBS round trip", round_trip),
        ("relativistic-correction smallness", relativistic),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(msg) => println!("PASS {}: {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {}: {name}: {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
