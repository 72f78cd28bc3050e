use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use wsd_ue::context::{derive_controlled_corpus, ContextMode, ContextParam, Reduction};
use wsd_ue::metrics::reversed_pair_count;
use wsd_ue::scores::{score_corpus, ScoreName, ScoreOptions};
use wsd_ue::sim::{simulate_samples_with, SimConfig};
use wsd_ue::Exec;

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn simulate(c: &mut Criterion) {
    let cfg = SimConfig { n_instances: 2000, ..SimConfig::default() };
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| simulate_samples_with(black_box(&cfg), exec).unwrap())
        });
    }
    group.finish();
}

fn score(c: &mut Criterion) {
    let cfg = SimConfig { n_instances: 5000, passes: 50, ..SimConfig::default() };
    let (corpus, samples) = simulate_samples_with(&cfg, Exec::Parallel).unwrap();
    let mut group = c.benchmark_group("score_bald");
    group.sample_size(20);
    for (name, exec) in STRATEGIES {
        let opts = ScoreOptions { exec, ..ScoreOptions::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| score_corpus(&corpus, &samples, ScoreName::Bald, &opts).unwrap())
        });
    }
    group.finish();
}

fn context(c: &mut Criterion) {
    let cfg = SimConfig { n_instances: 5000, passes: 1, ..SimConfig::default() };
    let (corpus, _) = simulate_samples_with(&cfg, Exec::Parallel).unwrap();
    let mut group = c.benchmark_group("derive_dp2");
    group.sample_size(20);
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                derive_controlled_corpus(&corpus, ContextMode::Dp, ContextParam::Size(2), Reduction::Truncate, exec)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn rpp(c: &mut Criterion) {
    let n = 100_000;
    let values: Vec<f64> = (0..n).map(|i| ((i * 7919) % 1000) as f64 / 1000.0).collect();
    let losses: Vec<f64> = (0..n).map(|i| ((i * 104_729) % 2) as f64).collect();
    c.bench_function("rpp_fast_100k", |b| {
        b.iter(|| reversed_pair_count(black_box(&values), black_box(&losses)))
    });
}

criterion_group!(benches, simulate, score, context, rpp);
criterion_main!(benches);
