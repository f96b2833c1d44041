// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use photon_window::parallel::{available_jobs, Executor};
use photon_window::sweep::{run_sweep, Engine, SweepSpec, SweepVariable, Tolerances};
use photon_window::ScaledParams;

fn executors() -> Vec<(&'static str, Executor)> {
    vec![
        ("sequential", Executor::Sequential),
        ("parallel", Executor::with_jobs(Some(available_jobs().max(2)))),
    ]
}

fn ode_sweep(c: &mut Criterion) {
    let spec = SweepSpec {
        variable: SweepVariable::Xi,
        lo: 0.0,
        hi: 8.0,
        step: 0.25,
        fixed: ScaledParams::with_xi(1.5, 0.1, 0.0, 0.0).unwrap(),
        engines: vec![Engine::Ode],
    };
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("ode_xi_sweep");
    group.sample_size(10);
    for (name, exec) in executors() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, exec| {
            b.iter(|| run_sweep(black_box(&spec), &tol, exec).unwrap())
        });
    }
    group.finish();
}

fn bloch_sweep(c: &mut Criterion) {
    let gamma = 1.0 / 7.0;
    let spec = SweepSpec {
        variable: SweepVariable::Delta,
        lo: -2.0,
        hi: 2.0,
        step: 0.1,
        fixed: ScaledParams::with_xi(gamma, 0.29 * gamma, 0.0, 1.14).unwrap(),
        engines: vec![Engine::Bloch],
    };
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("bloch_delta_sweep");
    group.sample_size(10);
    for (name, exec) in executors() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, exec| {
            b.iter(|| run_sweep(black_box(&spec), &tol, exec).unwrap())
        });
    }
    group.finish();
}

fn closed_form_sweep(c: &mut Criterion) {
    let spec = SweepSpec {
        variable: SweepVariable::Xi,
        lo: 0.0,
        hi: 8.0,
        step: 0.001,
        fixed: ScaledParams::with_xi(0.5, 0.1, 0.0, 0.0).unwrap(),
        engines: vec![Engine::RgWeak, Engine::RgStrong],
    };
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("closed_form_xi_sweep");
    for (name, exec) in executors() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, exec| {
            b.iter(|| run_sweep(black_box(&spec), &tol, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ode_sweep, bloch_sweep, closed_form_sweep);
criterion_main!(benches);
