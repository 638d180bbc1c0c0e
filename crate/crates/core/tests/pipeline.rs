use qed_sbs::decoherence::{gamma_exact, gamma_regime};
use qed_sbs::fidelity::{b_floor, log_b_small_patch};
use qed_sbs::sbs::{pointer_probabilities, SbsAnalyzer, SbsThresholds, Tiling};
use qed_sbs::{Macrofraction, MomentumVector, PhysicalScenario, Polarization, SolidAngleRegion, UnitDirection};
use proptest::prelude::*;
use std::f64::consts::PI;

fn scenario(theta: f64) -> PhysicalScenario {
    PhysicalScenario::new(1e5, theta, 0.01, 0.05).unwrap()
}

#[test]
fn region_and_macrofraction_json_round_trip() {
    let region = SolidAngleRegion::Union(vec![
        SolidAngleRegion::cap(0.3),
        SolidAngleRegion::PatchAround {
            center: UnitDirection::x(),
            solid_angle: 0.2,
        },
    ]);
    let text = serde_json::to_string(&region).unwrap();
    assert_eq!(serde_json::from_str::<SolidAngleRegion>(&text).unwrap(), region);
    let mac = Macrofraction::new(UnitDirection::y(), 0.6, Polarization::Second).unwrap();
    let text = serde_json::to_string(&mac).unwrap();
    assert_eq!(serde_json::from_str::<Macrofraction>(&text).unwrap(), mac);
    assert!(serde_json::from_str::<Macrofraction>(&text.replace("}", r#","extra":1}"#)).is_err());
}

#[test]
fn decoherence_outpaces_distinguishability() {
    let sc = scenario(25.0);
    let (p, pp) = (MomentumVector::new(0.02, 0.0, 0.0), MomentumVector::new(-0.02, 0.0, 0.0));
    let cap = SolidAngleRegion::cap(PI / 4.0);
    let mac = Macrofraction::new(UnitDirection::y(), 0.3, Polarization::First).unwrap();
    let tau = sc.tau_f();
    let late = [5.0 * tau, 50.0 * tau];
    let g: Vec<f64> = late.iter().map(|&s| gamma_exact(s, &p, &pp, &cap, &sc).unwrap().gamma).collect();
    let b: Vec<f64> = late.iter().map(|&s| log_b_small_patch(&mac, s, &p, &pp, &sc).log_b.exp()).collect();
    assert!(g[1] > 5.0 * g[0]);
    let floor = b_floor(&mac, &p, &pp, &sc);
    assert!((b[1] - floor).abs() < 1e-3 * floor);
    assert!(gamma_regime(50.0 * tau, &p, &pp, &cap, &sc).unwrap().regime_label.as_str() == "ThermalLinear");
}

#[test]
fn sbs_proximity_needs_enough_time() {
    let sc = scenario(400.0);
    let cap = SolidAngleRegion::cap(PI / 4.0);
    let tiling = Tiling::fibonacci_band(PI / 4.0, 32, true).unwrap();
    assert_eq!(tiling.unobserved, cap);
    let grid = pointer_probabilities(&MomentumVector::new(0.0, 0.0, 0.01), 0.05, 3).unwrap();
    let analyzer = SbsAnalyzer::new(&grid, &tiling, &sc).unwrap();
    let th = SbsThresholds::default();
    assert!(!analyzer.report(0.01, &th).sbs_proximity);
    let late = analyzer.report(1e3, &th);
    assert!(late.max_offdiag_modulus < analyzer.report(10.0, &th).max_offdiag_modulus);
    assert!(late.max_fidelity <= th.floor_factor * late.floor_estimate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_grows_with_time(s in 0.01..1e3f64, ratio in 1.01..10.0f64, angle in 0.0..PI) {
        let sc = scenario(25.0);
        let dp = MomentumVector::new(angle.cos(), angle.sin(), 0.3) * 0.03;
        let cap = SolidAngleRegion::cap(PI / 4.0);
        let zero = MomentumVector::zeros();
        let a = gamma_exact(s, &dp, &zero, &cap, &sc).unwrap().gamma;
        let b = gamma_exact(s * ratio, &dp, &zero, &cap, &sc).unwrap().gamma;
        prop_assert!(b >= a);
    }

    #[test]
    fn fidelity_is_a_probability(s in 0.0..1e4f64, theta in 10.0..1e4f64) {
        let sc = scenario(theta);
        let mac = Macrofraction::new(UnitDirection::from_spherical(1.2, 0.7), 0.4, Polarization::Second).unwrap();
        let b = log_b_small_patch(&mac, s, &MomentumVector::new(0.03, 0.01, -0.02), &MomentumVector::zeros(), &sc).b;
        prop_assert!((0.0..=1.0).contains(&b));
    }
}
