use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use num_complex::Complex64;

use starnet_core::fock::enumerate_detection_patterns;
use starnet_core::gaussian::FockEngine;
use starnet_core::linear_optics::permanent;
use starnet_core::protocol::herald_probability_exact;
use starnet_core::{DetectorModel, GaussianScenario, LossChannel, ProtocolParams, SqueezingSpec};

fn bench_permanent(c: &mut Criterion) {
    let mut group = c.benchmark_group("permanent");
    for n in [4usize, 8, 12] {
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::new((i as f64 + 1.0).sin(), (j as f64 * 0.7).cos()));
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| permanent(black_box(m))));
    }
    group.finish();
}

fn bench_herald(c: &mut Criterion) {
    let mut group = c.benchmark_group("herald_probability_exact");
    for n in [2usize, 4, 8] {
        let params = ProtocolParams::new(n, 2, 0.2, LossChannel::new(0.5).unwrap()).unwrap();
        let patterns = enumerate_detection_patterns(params.n_detectors(), 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &patterns, |b, patterns| {
            b.iter(|| patterns.iter().map(|p| herald_probability_exact(&params, p).unwrap()).sum::<f64>())
        });
    }
    group.finish();
}

fn bench_gaussian(c: &mut Criterion) {
    let mut group = c.benchmark_group("gaussian_evaluate");
    for n in [2usize, 3, 4] {
        let scenario = GaussianScenario {
            n_parties: n,
            squeezing: SqueezingSpec::from_db(2.17).unwrap(),
            channel: LossChannel::from_fiber(50.0, 0.2).unwrap(),
            detector: DetectorModel::default(),
        };
        group.bench_with_input(BenchmarkId::from_parameter(n), &scenario, |b, s| b.iter(|| s.evaluate().unwrap()));
    }
    group.finish();
}

fn bench_fock_engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("fock_engine");
    group.sample_size(10);
    for n in [2usize, 3] {
        let engine = FockEngine::with_tail_tolerance(
            n,
            SqueezingSpec::from_db(1.74).unwrap(),
            LossChannel::from_fiber(50.0, 0.2).unwrap(),
            DetectorModel::default(),
            1e-10,
        )
        .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &engine, |b, e| {
            b.iter(|| (e.click_probability().unwrap(), e.w_fidelity().unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_permanent, bench_herald, bench_gaussian, bench_fock_engine);
criterion_main!(benches);
