use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use qed_sbs::decoherence::gamma_exact;
use qed_sbs::fidelity::{log_b_macrofraction_exact, log_b_small_patch};
use qed_sbs::kernels::closed;
use qed_sbs::oracle::{displaced_thermal_state, uhlmann_fidelity};
use qed_sbs::{Macrofraction, MomentumVector, PhysicalScenario, Polarization, SolidAngleRegion, UnitDirection};
use std::f64::consts::PI;
use std::hint::black_box;

fn setup() -> (PhysicalScenario, MomentumVector, MomentumVector, Macrofraction) {
    let sc = PhysicalScenario::new(1e5, 400.0, 0.01, 0.05).unwrap();
    let h = 0.025 / 2f64.sqrt();
    let mac = Macrofraction::new(UnitDirection::y(), 0.2 * PI, Polarization::Second).unwrap();
    (sc, MomentumVector::new(h, h, 0.01), MomentumVector::new(-h, -h, 0.01), mac)
}

fn kernels(c: &mut Criterion) {
    c.bench_function("closed::decoherence", |b| b.iter(|| closed::decoherence(black_box(37.0), black_box(400.0))));
    c.bench_function("closed::fidelity", |b| b.iter(|| closed::fidelity(black_box(37.0), black_box(400.0))));
}

fn evaluators(c: &mut Criterion) {
    let (sc, p, pp, mac) = setup();
    let cap = SolidAngleRegion::cap(PI / 4.0);
    c.bench_function("gamma_exact", |b| b.iter(|| gamma_exact(black_box(37.0), &p, &pp, &cap, &sc).unwrap()));
    c.bench_function("log_b_small_patch", |b| b.iter(|| log_b_small_patch(&mac, black_box(37.0), &p, &pp, &sc)));
    c.bench_function("log_b_macrofraction_exact", |b| {
        b.iter(|| log_b_macrofraction_exact(&mac, black_box(37.0), &p, &pp, &sc).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let rho = displaced_thermal_state(0.5, Complex64::new(0.0, 0.0), 60).unwrap();
    let sigma = displaced_thermal_state(0.5, Complex64::new(1.0, 0.5), 60).unwrap();
    c.bench_function("uhlmann_fidelity N=60", |b| b.iter(|| uhlmann_fidelity(&rho, &sigma).unwrap()));
}

criterion_group!(benches, kernels, evaluators, oracle);
criterion_main!(benches);
