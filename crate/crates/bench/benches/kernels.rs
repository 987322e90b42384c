use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use exclt_bench::{cauchy_scale_mixture, pareto, spread_measure, stable};
use exclt_core::characteristics::{
    default_grid, dsharp, fit_spectral, prokhorov, q_eps, spectral_measure_lambda, DEFAULT_R_MAX,
};
use exclt_core::empirics::{empirical_cf, TGrid};
use exclt_core::mixture::verify_example1;
use exclt_core::{
    draw_directing, sample_array_replicates, sample_stable, stable_cf, NormingSequence,
    StatTestConfig,
};

fn stable_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("stable");
    for alpha in [0.7, 1.0, 1.5] {
        let p = stable(alpha, 0.5);
        g.bench_with_input(BenchmarkId::new("cf", alpha), &p, |b, p| {
            b.iter(|| {
                (0..100)
                    .map(|k| stable_cf(0.05 * k as f64, p).re)
                    .sum::<f64>()
            })
        });
        g.bench_with_input(BenchmarkId::new("sample_10k", alpha), &p, |b, p| {
            b.iter(|| sample_stable(p, 10_000, 1).unwrap())
        });
    }
    g.finish();
}

fn empirical(c: &mut Criterion) {
    let xs = sample_stable(&stable(1.5, 0.0), 100_000, 3).unwrap();
    let grid = TGrid::default();
    c.bench_function("empirical_cf_100k", |b| {
        b.iter(|| empirical_cf(black_box(&xs), &grid).unwrap())
    });
    let law = cauchy_scale_mixture();
    let norming = NormingSequence::power(1.0);
    c.bench_function("array_sums_n1024_r200x2", |b| {
        b.iter(|| sample_array_replicates(&law, &norming, 1024, 2, 200, 5).unwrap())
    });
}

fn characteristics(c: &mut Criterion) {
    let p = draw_directing(&pareto(1.5), 7).unwrap();
    let norming = NormingSequence::power(1.5);
    let grid = default_grid();
    c.bench_function("q_eps_pareto", |b| {
        b.iter(|| q_eps(&p, &norming, black_box(10_000), 0.1).unwrap())
    });
    c.bench_function("lambda_star_and_fit", |b| {
        b.iter(|| {
            let lambda = spectral_measure_lambda(&p, &norming, 10_000, &grid).unwrap();
            fit_spectral(&lambda, 1.5, &grid, StatTestConfig::default().fit_window).unwrap()
        })
    });
    c.bench_function("identity_check", |b| {
        b.iter(|| verify_example1(1e-10, 1.0).unwrap())
    });
}

fn metrics(c: &mut Criterion) {
    let mut g = c.benchmark_group("metrics");
    for k in [8, 42] {
        let mu = spread_measure(k, -4.0, 4.0, |i| 0.1 + 0.01 * i as f64);
        let nu = spread_measure(k, -3.5, 4.5, |i| 0.12 + 0.005 * i as f64);
        g.bench_with_input(
            BenchmarkId::new("prokhorov", k),
            &(&mu, &nu),
            |b, (mu, nu)| b.iter(|| prokhorov(mu, nu)),
        );
        g.bench_with_input(BenchmarkId::new("dsharp", k), &(&mu, &nu), |b, (mu, nu)| {
            b.iter(|| dsharp(mu, nu, DEFAULT_R_MAX))
        });
    }
    g.finish();
}

criterion_group!(benches, stable_kernels, empirical, characteristics, metrics);
criterion_main!(benches);
