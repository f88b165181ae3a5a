use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use scalemetrics_bench::{edited_pair, growth_history, pareto_contributions};
use scalemetrics_core::metrics::{levenshtein_distance, window_observations, ProductionMeasure};
use scalemetrics_core::simulate::{zipf_total, ZipfTeamModel};
use scalemetrics_core::tails::{hill_estimator, pareto_mle_fit, scan_cutoffs, TailConfig};
use scalemetrics_core::windows::TeamDefinition;

fn levenshtein(c: &mut Criterion) {
    let mut g = c.benchmark_group("levenshtein");
    for len in [100, 1_000, 10_000] {
        let (a, b) = edited_pair(len);
        g.bench_with_input(BenchmarkId::from_parameter(len), &(a, b), |bench, (a, b)| {
            bench.iter(|| levenshtein_distance(black_box(a), black_box(b)))
        });
    }
    g.finish();
}

fn tails(c: &mut Criterion) {
    let mut g = c.benchmark_group("tails");
    g.sample_size(10);
    let quick = TailConfig {
        resamples: 0,
        ..TailConfig::default()
    };
    for n in [1_000, 100_000] {
        let d = pareto_contributions(0.7, n, 42);
        g.bench_with_input(BenchmarkId::new("hill", n), &d, |b, d| {
            b.iter(|| hill_estimator(d, n / 10, &TailConfig::default()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("cutoff_scan", n), &d, |b, d| {
            b.iter(|| scan_cutoffs(d, &quick))
        });
        g.bench_with_input(BenchmarkId::new("pareto_mle", n), &d, |b, d| {
            b.iter(|| pareto_mle_fit(d, &TailConfig::default()).unwrap())
        });
    }
    g.finish();
}

fn zipf(c: &mut Criterion) {
    for n in [25u64, 100_000] {
        let m = ZipfTeamModel::new(1000.0, 0.5, n).unwrap();
        c.bench_function(&format!("zipf_total/{n}"), |b| b.iter(|| zipf_total(black_box(&m))));
    }
}

fn windows(c: &mut Criterion) {
    let h = growth_history();
    c.bench_function("window_observations/growth", |b| {
        b.iter(|| window_observations(&h, TeamDefinition::default(), ProductionMeasure::Commits).unwrap())
    });
}

criterion_group!(benches, levenshtein, tails, zipf, windows);
criterion_main!(benches);
