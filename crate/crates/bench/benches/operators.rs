use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mskit_bench::{bases, dual_pair, pair, symbol};
use mskit_core::dualspace::{dtto_blocks, interior_commutator_residual};
use mskit_core::harness::run_check;
use mskit_core::intertwine::{solve_intertwiners, RANK_TOL};
use mskit_core::operators::{atto_matrix, dist_to_alpha_hinf, HANKEL_SCHEDULE};
use mskit_core::{CheckConfig, ModelBasis};

fn model_space(c: &mut Criterion) {
    let mut g = c.benchmark_group("model_space");
    for degree in [2, 4, 8] {
        let (theta, alpha) = pair(degree, 7);
        g.bench_with_input(BenchmarkId::new("basis", degree), &theta, |b, t| b.iter(|| ModelBasis::new(black_box(t), 4096)));
        g.bench_with_input(BenchmarkId::new("gcd", degree), &(theta.clone(), alpha.clone()), |b, (t, a)| {
            b.iter(|| black_box(t).gcd(black_box(a)))
        });
        let (tb, ab) = bases(&theta, &alpha);
        let phi = symbol(tb.grid_size());
        g.bench_with_input(BenchmarkId::new("atto_matrix", degree), &phi, |b, phi| b.iter(|| atto_matrix(black_box(phi), &tb, &ab)));
        g.bench_function(BenchmarkId::new("solve_intertwiners", degree), |b| b.iter(|| solve_intertwiners(&tb, &ab, RANK_TOL)));
        g.bench_with_input(BenchmarkId::new("nehari_distance", degree), &phi, |b, phi| {
            b.iter(|| dist_to_alpha_hinf(black_box(phi), &alpha, &HANKEL_SCHEDULE))
        });
    }
    g.finish();
}

fn dual_space(c: &mut Criterion) {
    let mut g = c.benchmark_group("dual_space");
    g.sample_size(20);
    for degree in [1, 3] {
        let (theta, alpha) = dual_pair(degree, 11);
        let phi = symbol(8192);
        g.bench_with_input(BenchmarkId::new("dtto_blocks", degree), &phi, |b, phi| b.iter(|| dtto_blocks(black_box(phi), &theta, &alpha, None)));
        g.bench_with_input(BenchmarkId::new("interior_commutator", degree), &phi, |b, phi| {
            b.iter(|| interior_commutator_residual(black_box(phi), &theta, &alpha, None))
        });
    }
    g.finish();
}

fn suites(c: &mut Criterion) {
    let mut g = c.benchmark_group("suite");
    g.sample_size(10);
    for id in ["thm-inter", "thm-5.2-idatto"] {
        let mut config = CheckConfig::new(id, 1).expect("registered");
        config.trials = 8;
        g.bench_function(id, |b| b.iter(|| run_check(black_box(&config))));
    }
    g.finish();
}

criterion_group!(benches, model_space, dual_space, suites);
criterion_main!(benches);
