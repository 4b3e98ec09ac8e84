use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qlimit_bench::{four_mode, toy};
use qlimit_core::langevin::{generate_noise, monte_carlo_resolution, SimConfig, SimMode};
use qlimit_core::reducer::{brute_force_eigen, reduce};
use qlimit_core::resolution::{feasibility_report, optimal_tau};
use qlimit_core::spectra::spectrum_table;
use qlimit_core::{derive, Grid, ResolutionOptions, SystemConfig};

fn closed_form(c: &mut Criterion) {
    let config = SystemConfig::reference_default();
    let d = derive(&config).unwrap();
    let opts = ResolutionOptions::default();
    c.bench_function("derive", |b| b.iter(|| derive(black_box(&config)).unwrap()));
    c.bench_function("optimal_tau", |b| b.iter(|| optimal_tau(black_box(&d), &opts).unwrap()));
    c.bench_function("feasibility_report", |b| b.iter(|| feasibility_report(black_box(&d), &opts)));
    let grid = Grid::log(1e2, 1e9, 256);
    c.bench_function("spectrum_table_256", |b| b.iter(|| spectrum_table(black_box(&d), &grid).unwrap()));
}

fn reducer(c: &mut Criterion) {
    let s = four_mode();
    c.bench_function("reduce_4_modes", |b| b.iter(|| reduce(black_box(&s)).unwrap()));
    c.bench_function("eigen_4_modes", |b| b.iter(|| brute_force_eigen(black_box(&s), &[0.5])));
}

fn simulation(c: &mut Criterion) {
    let d = toy();
    c.bench_function("noise_10k_steps", |b| b.iter(|| generate_noise(1, 0, 10_000, 0.05, 0.0)));
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    for mode in [SimMode::Adiabatic, SimMode::Full] {
        let cfg = SimConfig::new(&d, mode, vec![50.0, 100.0], 4, 1);
        group.bench_function(format!("{mode}_4x100"), |b| b.iter(|| monte_carlo_resolution(black_box(&cfg), &d).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, closed_form, reducer, simulation);
criterion_main!(benches);
