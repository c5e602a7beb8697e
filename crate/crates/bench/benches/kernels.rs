use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use jpm_parity::protocol::{amplitude_for_occupation, drive_amplitude_at, parity_pulse};
use jpm_parity::{
    coherent_state, detection_probability, displacement_operator, evolve, ladder_operators, Complex64,
    EvolveOptions, Hamiltonian, HilbertSpace, JpmParams, LindbladModel, QubitRegister,
};

const CHI: f64 = 2.0 * PI * 5e6;
const OMEGA_C: f64 = 2.0 * PI * 6e9;

fn displacement(c: &mut Criterion) {
    let space = HilbertSpace::new(40).unwrap();
    c.bench_function("displacement_operator dim 40", |b| {
        b.iter(|| displacement_operator(black_box(Complex64::new(2.0, -1.0)), &space).unwrap())
    });
}

fn closed_form_drive(c: &mut Criterion) {
    let r = QubitRegister::uniform(4, CHI, OMEGA_C).unwrap();
    let pulse = parity_pulse(&r, amplitude_for_occupation(&r, 9.0).unwrap()).unwrap();
    c.bench_function("closed-form drive amplitude", |b| {
        b.iter(|| drive_amplitude_at(black_box(OMEGA_C + 2.0 * CHI), &pulse, pulse.t_d))
    });
}

fn damped_cavity(c: &mut Criterion) {
    let space = HilbertSpace::new(37).unwrap();
    let l = ladder_operators(&space).unwrap();
    let model = LindbladModel::new(Hamiltonian::Static(l.number.clone()), vec![l.annihilation.clone()]).unwrap();
    let rho0 = coherent_state(Complex64::new(3.0, 0.0), &space).unwrap().to_density();
    let times = [0.0, 1.0, 2.0];
    c.bench_function("lindblad damped cavity dim 37", |b| {
        b.iter(|| evolve(&model, &rho0, &times, &EvolveOptions::default()).unwrap())
    });
}

fn detector(c: &mut Criterion) {
    let params = JpmParams::baseline(OMEGA_C);
    let space = HilbertSpace::new(20).unwrap();
    let grid: Vec<f64> = (0..=4).map(|i| 5e-9 * i as f64).collect();
    let mut group = c.benchmark_group("detector");
    group.sample_size(10);
    group.bench_function("detection probability dim 20, 20 ns", |b| {
        b.iter(|| {
            detection_probability(Complex64::new(2.0, 0.0), 2.0 * CHI, &params, &space, &grid, &EvolveOptions::default())
                .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, displacement, closed_form_drive, damped_cavity, detector);
criterion_main!(benches);
