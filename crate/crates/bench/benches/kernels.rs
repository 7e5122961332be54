use std::f64::consts::PI;
use std::hint::black_box;

use atsim_bench::{cos4_trace, dephasing, trace_drive};
use atsim_core::experiments::default_grid;
use atsim_core::fitting::{fit, FitModel, FitOptions};
use atsim_core::lindblad::{default_dt, evolve_rk4, steady_state};
use atsim_core::linalg::{eig_hermitian, propagator};
use atsim_core::model::rotating_frame_hamiltonian;
use atsim_core::{spectrum_scan, DensityMatrix, MasterEquation};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

fn linalg(c: &mut Criterion) {
    let h = rotating_frame_hamiltonian(&trace_drive().with_delta_p(3.0));
    c.bench_function("eig_hermitian", |b| b.iter(|| eig_hermitian(black_box(&h)).unwrap()));
    c.bench_function("propagator", |b| b.iter(|| propagator(black_box(&h), black_box(1.8)).unwrap()));
}

fn dynamics(c: &mut Criterion) {
    let d = trace_drive();
    let eq = MasterEquation::new(rotating_frame_hamiltonian(&d), &dephasing()).unwrap();
    let dt = default_dt(&d);
    c.bench_function("rk4_1us", |b| {
        b.iter(|| evolve_rk4(&DensityMatrix::ground(), black_box(&eq), 1.0, dt).unwrap())
    });
    c.bench_function("steady_state", |b| b.iter(|| steady_state(black_box(&eq), None).unwrap()));
}

fn scans(c: &mut Criterion) {
    let d = trace_drive();
    let grid = default_grid(d.omega_c);
    let t = 40.0 * PI / d.omega_c;
    let mut group = c.benchmark_group("spectrum_scan_301");
    group.sample_size(20);
    group.bench_function("coherent", |b| b.iter(|| spectrum_scan(&d, black_box(&grid), t, None).unwrap()));
    let dec = dephasing();
    group.bench_function("dephasing", |b| b.iter(|| spectrum_scan(&d, black_box(&grid), t, Some(&dec)).unwrap()));
    group.finish();
}

fn fitting(c: &mut Criterion) {
    let (truth, data) = cos4_trace();
    let init: Vec<f64> = truth.iter().map(|v| v * 1.03).collect();
    c.bench_function("fit_damped_cos4", |b| {
        b.iter_batched(
            || init.clone(),
            |init| fit(FitModel::DampedCos4, black_box(&data), &init, &FitOptions::default()).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, linalg, dynamics, scans, fitting);
criterion_main!(benches);
