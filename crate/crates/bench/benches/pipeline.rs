use std::hint::black_box;

use bht_core::analysis::{realize, EnsembleConfig};
use bht_core::solver::{SolveConfig, SourceSpec, TracerSystem};
use bht_core::spectral::{dealiased_product, Lattice, SpectralField};
use bht_core::velocity::{build_velocity, sample_phases, VelocityParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn product(c: &mut Criterion) {
    let mut g = c.benchmark_group("dealiased_product");
    for n in [64, 128, 256] {
        let l = Lattice::new(n).unwrap();
        let a = SpectralField::random(l, 1, 1.0);
        let b = SpectralField::random(l, 2, 1.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| dealiased_product(black_box(&a), black_box(&b)).unwrap())
        });
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_direct");
    g.sample_size(10);
    for n in [64, 128] {
        let l = Lattice::new(n).unwrap();
        let p = VelocityParams::steep(1.0, -2.5).unwrap();
        let u = build_velocity(&p, &sample_phases(3, l, None)).unwrap();
        let src = SourceSpec::unit_shells(l, 2.0).unwrap();
        let sys = TracerSystem::new(&u);
        let cfg = SolveConfig::default();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| sys.solve_direct(black_box(&src.field), &cfg).unwrap())
        });
    }
    g.finish();
}

fn realization(c: &mut Criterion) {
    let l = Lattice::new(128).unwrap();
    let cfg = EnsembleConfig {
        lattice: l,
        members: 1,
        base_seed: 5,
        frozen_below: Some(6.0),
        velocity: VelocityParams::kraichnan(1.0, 32).unwrap(),
        source: SourceSpec::unit_shells(l, 2.0).unwrap(),
        solve: SolveConfig {
            kappa_bar: 3.0,
            ..SolveConfig::default()
        },
        window: (9.0, 16.0),
        cross_check: false,
        check_truncation: false,
    };
    let mut g = c.benchmark_group("realization");
    g.sample_size(10);
    g.bench_function("kraichnan_n128", |bench| {
        bench.iter(|| realize(black_box(&cfg), 0).unwrap())
    });
    g.finish();
}

criterion_group!(benches, product, solve, realization);
criterion_main!(benches);
