use std::hint::black_box;

use capmkit::{
    acf, build_panel, durbin_watson, log_returns, monthly_sample, ols_simple, parse_price_list,
    recovery_experiment, student_t_sf,
};
use capmkit_bench::{bench_pricelist, bench_spec, noise_series, regression_input};
use criterion::{criterion_group, criterion_main, Criterion};

fn bench_ols(c: &mut Criterion) {
    let (x_small, y_small) = regression_input(32, 1);
    c.bench_function("ols_simple_n32", |b| {
        b.iter(|| ols_simple(black_box(&x_small), black_box(&y_small)).unwrap())
    });
    let (x_large, y_large) = regression_input(1000, 2);
    c.bench_function("ols_simple_n1000", |b| {
        b.iter(|| ols_simple(black_box(&x_large), black_box(&y_large)).unwrap())
    });
}

fn bench_special(c: &mut Criterion) {
    c.bench_function("student_t_sf_df30", |b| {
        b.iter(|| student_t_sf(black_box(2.042), black_box(30)).unwrap())
    });
}

fn bench_diagnostics(c: &mut Criterion) {
    let series = noise_series(1000, 3);
    c.bench_function("durbin_watson_n1000", |b| {
        b.iter(|| durbin_watson(black_box(&series)).unwrap())
    });
    c.bench_function("acf_n1000_lag20", |b| {
        b.iter(|| acf(black_box(&series), black_box(20)).unwrap())
    });
}

fn bench_pipeline(c: &mut Criterion) {
    let text = bench_pricelist();
    c.bench_function("parse_pricelist_10x33", |b| {
        b.iter(|| parse_price_list(black_box(&text), true).unwrap())
    });

    let (records, _) = parse_price_list(&text, true).unwrap();
    c.bench_function("build_panel_10x33", |b| {
        b.iter(|| build_panel(black_box(&records)).unwrap())
    });

    let panel = build_panel(&records).unwrap();
    c.bench_function("monthly_returns_10x33", |b| {
        b.iter(|| {
            let prices = monthly_sample(black_box(&panel));
            prices
                .iter()
                .map(|(ticker, table)| log_returns(ticker, table).values.len())
                .sum::<usize>()
        })
    });
}

fn bench_recovery(c: &mut Criterion) {
    let spec = bench_spec();
    let mut group = c.benchmark_group("simulation");
    group.sample_size(10);
    group.bench_function("recovery_100_trials", |b| {
        b.iter(|| recovery_experiment(black_box(&spec), 100).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_ols,
    bench_special,
    bench_diagnostics,
    bench_pipeline,
    bench_recovery
);
criterion_main!(benches);
