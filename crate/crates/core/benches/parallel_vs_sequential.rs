//! Sequential vs rayon execution of the data-parallel kernels.
//!
//! Run with `cargo bench -p biphoton`. Building with
//! `--no-default-features` turns the Parallel arm into a second sequential run.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use biphoton::experiment::{sample_pairs, simulate_slit_scan, JointModel, PairBudget, SlitScanConfig};
use biphoton::gaussfit::DoubleGaussian;
use biphoton::model::{x_minus_moments, XMinusCdf};
use biphoton::numerics::grid::Axis;
use biphoton::propagation::{fft_propagate_oracle, PropagationPlanes};
use biphoton::Execution;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn fft_oracle(c: &mut Criterion) {
    let dg = DoubleGaussian::new(1.0, 0.25).unwrap();
    let planes = PropagationPlanes::from_reduced(&dg, 1.0, 1.0, 1.0).unwrap();
    let axis = Axis::centered(1024, 96.0 / 1024.0).unwrap();
    let mut g = c.benchmark_group("fft_propagate_oracle_1024");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| fft_propagate_oracle(black_box(&dg), &planes, &axis, exec).unwrap())
        });
    }
    g.finish();
}

fn slit_scan(c: &mut Criterion) {
    let model = JointModel::DoubleGaussian(DoubleGaussian::new(1.41e-3, 1.06e-5).unwrap());
    let cfg = SlitScanConfig { budget: PairBudget::PerStep(50_000), ..SlitScanConfig::default() };
    let mut g = c.benchmark_group("slit_scan_45x50k");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| simulate_slit_scan(black_box(&cfg), &model, exec).unwrap())
        });
    }
    g.finish();
}

fn sinc_sampling(c: &mut Criterion) {
    let model = JointModel::SincExact { sigma_plus: 10.0, a: 1.0 };
    let mut g = c.benchmark_group("sinc_rejection_sampling_500k");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sample_pairs(black_box(&model), 500_000, 0, exec).unwrap())
        });
    }
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("x_minus_quadrature");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new("moments", name), &exec, |b, &exec| {
            b.iter(|| x_minus_moments(black_box(2.0), exec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("cdf_table", name), &exec, |b, &exec| {
            b.iter(|| XMinusCdf::new(black_box(2.0), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fft_oracle, slit_scan, sinc_sampling, quadrature);
criterion_main!(benches);
