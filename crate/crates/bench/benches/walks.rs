use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use anglewalk::analysis::{curvature_series, lipschitz_constant, msd_exact, tv_fourier_bound};
use anglewalk::limits::{derived_drift_coeff, simulate_c2};
use anglewalk::walks::{rescale, simulate_walk, walk_endpoint};
use anglewalk::{derive_stream, Angle, RescaleMode, Seed, WalkSpec};

fn walks(c: &mut Criterion) {
    let mut group = c.benchmark_group("walk");
    for n in [1_000usize, 100_000] {
        group.throughput(Throughput::Elements(n as u64));
        let specs = [
            ("iid", WalkSpec::iid(std::f64::consts::FRAC_PI_2, n).unwrap()),
            ("markov", WalkSpec::markov(16f64.sqrt(), 1.5, n).unwrap()),
        ];
        for (name, spec) in specs {
            group.bench_with_input(BenchmarkId::new(format!("{name}/full"), n), &spec, |b, spec| {
                let mut src = derive_stream(Seed(1), 0);
                b.iter(|| simulate_walk(spec, &mut src).unwrap())
            });
            group.bench_with_input(BenchmarkId::new(format!("{name}/endpoint"), n), &spec, |b, spec| {
                let mut src = derive_stream(Seed(1), 0);
                b.iter(|| walk_endpoint(spec, &mut src).unwrap())
            });
        }
    }
    group.finish();
}

fn estimators(c: &mut Criterion) {
    let spec = WalkSpec::shrinking(2.0 * std::f64::consts::PI, 0.5, 10_000).unwrap();
    let walk = simulate_walk(&spec, &mut derive_stream(Seed(2), 0)).unwrap();
    let path = rescale(&walk.path, RescaleMode::ByN);
    c.bench_function("curvature_series/10000", |b| b.iter(|| curvature_series(black_box(&path)).unwrap()));
    c.bench_function("lipschitz/grid1000", |b| b.iter(|| lipschitz_constant(black_box(&path), 1000).unwrap()));
    let half_pi = Angle::new(std::f64::consts::FRAC_PI_2).unwrap();
    c.bench_function("msd_exact/1e6", |b| b.iter(|| msd_exact(black_box(half_pi), 1_000_000).unwrap()));
    c.bench_function("tv_fourier_bound/r2", |b| {
        b.iter(|| tv_fourier_bound(black_box(half_pi), 2, 1 << 20).unwrap())
    });
}

fn limits(c: &mut Criterion) {
    let kappa = 16.0;
    let drift = derived_drift_coeff(kappa);
    c.bench_function("c2_limit/grid10000", |b| {
        let mut src = derive_stream(Seed(3), 0);
        b.iter(|| simulate_c2(kappa, drift, 10_000, &mut src).unwrap())
    });
}

criterion_group!(benches, walks, estimators, limits);
criterion_main!(benches);
